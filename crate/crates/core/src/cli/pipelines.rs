use super::{Check, Command, GroupChoice, Outcome, RunConfig};
use crate::certificate::{DecayCertificate, Verdict};
use crate::error::{Error, Result};
use crate::multiplier::{
    contour_bound_ln, convolve, decay_certificate_kernel, decay_certificate_signal, heat_kernel, kernel_of_symbol, GroupSpec,
    Kernel, SampledSignal, ShiftPolicy,
};
use crate::representation::{factorize, BanachRepSpec, RepVector, VectorKind};
use crate::strongfact::{psi_regularity_probe, strong_factorize_testfn, strong_factorize_vector, testfn_grid, TestFunction};
use crate::symbols::{decay_certificate_symbol, identity_residual_detail, EntireSymbol, SymbolGrid, WedgeRegion};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::f64::consts::PI;

pub const IDENTITY_EPS: [f64; 4] = [0.1, 0.25, 0.5, 1.0];
pub const IDENTITY_TOL: f64 = 1e-12;
/// Wedge sampled by the identity scan: strip |Im z| < 4, sector slope 0.8, |z| <= 50.
pub const IDENTITY_WEDGE: (f64, f64, f64) = (4.0, 0.8, 50.0);
pub const KERNEL_RADIUS: f64 = 8.0;
pub const KERNEL_WEIGHTS: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const FACTORIZE_TOL: f64 = 1e-8;
pub const CIRCLE_FACTORIZE_TOL: f64 = 1e-11;
pub const TESTFN_TOL: f64 = 1e-6;
pub const HYPER_TOL: f64 = 1e-4;
pub const INDEPENDENCE_TOL: f64 = 1e-8;
pub const INVERSION_TOL: f64 = 1e-6;
const DEFAULT_CIRCLE_M: usize = 256;

/// 1000 points of W(4, 0.8) with |z| <= 50: a 25 x 20 lattice on the strip and
/// another on the two sectors. A nonzero seed jitters each point inside its cell.
pub fn wedge_points(seed: u64) -> Vec<C> {
    let (n, theta, r) = IDENTITY_WEDGE;
    let mut rng = (seed != 0).then(|| ChaCha8Rng::seed_from_u64(seed));
    let mut jit = |cell: f64| rng.as_mut().map_or(0.0, |g| g.gen_range(-0.5..0.5) * cell);
    let mut pts = Vec::with_capacity(1000);
    let (nx, ny) = (25, 20);
    let (dx, dy) = (2.0 * r / nx as f64, 2.0 * 0.975 * n / ny as f64);
    for i in 0..nx {
        for j in 0..ny {
            let x = -r + (i as f64 + 0.5) * dx + jit(dx);
            let y = -0.975 * n + (j as f64 + 0.5) * dy + jit(dy);
            pts.push(C::new(x, y));
        }
    }
    let amax = theta.atan() * 0.99;
    let (dr, da) = (r / nx as f64, 2.0 * amax / ny as f64);
    for i in 0..nx {
        for j in 0..ny {
            let rho = (i as f64 + 0.5) * dr + jit(dr);
            let a = -amax + (j as f64 + 0.5) * da + jit(da);
            let side = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            pts.push(C::from_polar(rho, a) * side);
        }
    }
    pts
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct IdentityScan {
    pub eps: Vec<f64>,
    pub points: usize,
    pub max_absolute: f64,
    pub argmax_absolute: (f64, f64, f64),
    pub max_scaled: f64,
    pub argmax_scaled: (f64, f64, f64),
}

pub fn identity_scan(eps: &[f64], seed: u64) -> IdentityScan {
    let pts = wedge_points(seed);
    let mut s = IdentityScan {
        eps: eps.to_vec(),
        points: pts.len(),
        max_absolute: 0.0,
        argmax_absolute: (0.0, 0.0, 0.0),
        max_scaled: 0.0,
        argmax_scaled: (0.0, 0.0, 0.0),
    };
    for &e in eps {
        for z in &pts {
            let d = identity_residual_detail(e, *z);
            // NaN or infinity counts as the worst case
            if !(d.absolute <= s.max_absolute) {
                s.max_absolute = d.absolute;
                s.argmax_absolute = (e, z.re, z.im);
            }
            if !(d.scaled <= s.max_scaled) {
                s.max_scaled = d.scaled;
                s.argmax_scaled = (e, z.re, z.im);
            }
        }
    }
    s
}

pub(crate) fn symbol_by_name(name: &str, cfg: &RunConfig) -> Result<EntireSymbol> {
    Ok(match name {
        "alpha" => EntireSymbol::alpha(cfg.eps.unwrap_or(0.1)),
        "beta" => EntireSymbol::beta(cfg.eps.unwrap_or(0.5)),
        "heat" => EntireSymbol::heat(),
        "erf_linear" => EntireSymbol::erf_linear(cfg.r.unwrap_or(0.75)),
        "smoothed_log_exp" => EntireSymbol::smoothed_log_exp(cfg.m.unwrap_or(8) as f64, -1.0),
        "lorentzian" => EntireSymbol::lorentzian(),
        _ => return Err(Error::Config(format!("unknown symbol {name:?}"))),
    })
}

pub(crate) fn parse_testfn(s: &str) -> Result<(String, Option<f64>)> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a.parse::<f64>().map_err(|_| Error::Config(format!("bad test function {s:?}")))?)),
        None => (s, None),
    };
    match kind {
        "bump" | "gaussian" | "zero" => Ok((kind.to_string(), arg)),
        _ => Err(Error::Config(format!("unknown test function {s:?}"))),
    }
}

fn line_group(cfg: &RunConfig, default: fn() -> GroupSpec) -> Result<GroupSpec> {
    match (cfg.grid_l, cfg.grid_n) {
        (None, None) => Ok(default()),
        (l, n) => {
            let d = default();
            GroupSpec::real_line(l.unwrap_or(d.half_period()), n.unwrap_or(d.len()))
        }
    }
}

fn group(cfg: &RunConfig) -> Result<GroupSpec> {
    match cfg.group {
        GroupChoice::Line => line_group(cfg, GroupSpec::default_line),
        GroupChoice::Circle => GroupSpec::circle(cfg.modes.unwrap_or(DEFAULT_CIRCLE_M)),
    }
}

pub fn kernel_summary(k: &Kernel) -> Value {
    json!({
        "symbol": k.symbol.describe(),
        "mass": k.mass,
        "symmetric": k.symmetric,
        "evenness_defect": k.evenness_defect,
        "edge_ratio": k.edge_ratio,
        "overlap_residual": k.overlap_residual,
        "shift_bands": k.bands,
    })
}

pub fn finite_checks(cert: &DecayCertificate, label: &str) -> Vec<Check> {
    cert.entries.iter().map(|e| Check::flag(format!("{label} n={} finite", e.n), e.verdict == Verdict::Finite)).collect()
}

/// The exact kernel e^{-|x|}/2 of 1/(1+xi^2) with its contour bound; the
/// sampled symbol is unresolved on any grid.
pub fn lorentzian_control(g: &GroupSpec, weights: &[f64], radius: f64) -> DecayCertificate {
    let s = SampledSignal::from_fn(g, |x| 0.5 * (-x.abs()).exp());
    let f = EntireSymbol::lorentzian();
    let bound = |n: f64| contour_bound_ln(&f, n);
    decay_certificate_signal(&s, weights, radius, "exact lorentzian kernel", &bound)
}

pub(crate) fn dispatch(cfg: &RunConfig) -> (Value, Outcome) {
    let r = match cfg.command {
        Command::Identity => identity(cfg),
        Command::Kernel => kernel(cfg),
        Command::Decay => decay(cfg),
        Command::Heat => heat(cfg),
        Command::Factorize => factorize_cmd(cfg),
        Command::StrongfactTestfn => testfn(cfg),
        Command::StrongfactHyper => hyper(cfg),
        Command::ReportAll => unreachable!("report-all is handled by the criteria module"),
    };
    match r {
        Ok(x) => x,
        Err((params, e)) => (params, Outcome::failed(&e, Value::Null)),
    }
}

type Run = std::result::Result<(Value, Outcome), (Value, Error)>;

fn identity(cfg: &RunConfig) -> Run {
    let eps = cfg.eps.map(|e| vec![e]).unwrap_or_else(|| IDENTITY_EPS.to_vec());
    let tol = cfg.tol.unwrap_or(IDENTITY_TOL);
    let params = json!({ "eps": eps, "tol": tol, "seed": cfg.seed, "wedge": IDENTITY_WEDGE });
    let s = identity_scan(&eps, cfg.seed);
    // the scaled residual gates; the absolute one cannot reach rounding level where e^a and e^b cancel
    let checks = vec![Check::at_most("scaled residual", s.max_scaled, tol)];
    Ok((params, Outcome::new(checks, json!(s))))
}

fn kernel(cfg: &RunConfig) -> Run {
    let name = cfg.symbol.clone().unwrap_or_else(|| "alpha".into());
    let weights = cfg.n_list.clone().unwrap_or_else(|| KERNEL_WEIGHTS.to_vec());
    let g = group(cfg).map_err(|e| (Value::Null, e))?;
    let params = json!({ "symbol": name, "eps": cfg.eps, "m": cfg.m, "R": cfg.r, "n": weights, "radius": KERNEL_RADIUS, "group": g.describe() });
    let fail = |e| (params.clone(), e);
    if name == "lorentzian" {
        let cert = lorentzian_control(&g, &weights, KERNEL_RADIUS);
        let checks = finite_checks(&cert, "kappa");
        return Ok((params, Outcome::new(checks, json!({ "certificate": cert }))));
    }
    let sym = symbol_by_name(&name, cfg).map_err(fail)?;
    let k = kernel_of_symbol(&sym, &g, &ShiftPolicy::default()).map_err(fail)?;
    let cert = decay_certificate_kernel(&k, &weights, KERNEL_RADIUS);
    let mut checks = finite_checks(&cert, "kappa");
    checks.push(Check::flag("kernel symmetric", k.symmetric));
    Ok((params, Outcome::new(checks, json!({ "kernel": kernel_summary(&k), "certificate": cert }))))
}

fn decay(cfg: &RunConfig) -> Run {
    let name = cfg.symbol.clone().unwrap_or_else(|| "alpha".into());
    let sym = symbol_by_name(&name, cfg).map_err(|e| (Value::Null, e))?;
    let (c0, theta) = sym.decay_class.unwrap_or((0.0, 0.5));
    let c = cfg.c.unwrap_or(c0);
    let grid = SymbolGrid::default();
    let params = json!({ "symbol": sym.describe(), "c": c, "wedge": [4.0, theta], "radius": grid.radius });
    if !(c > 0.0) {
        return Err((params, Error::Config(format!("{name} has no claimed decay class; give --c"))));
    }
    let w = WedgeRegion::new(4.0, theta).map_err(|e| (params.clone(), e))?;
    let cert = decay_certificate_symbol(&sym, c, &w, &grid);
    let checks = finite_checks(&cert, "symbol");
    Ok((params, Outcome::new(checks, json!({ "certificate": cert }))))
}

fn heat(cfg: &RunConfig) -> Run {
    let g = group(cfg).map_err(|e| (Value::Null, e))?;
    let tol = cfg.tol.unwrap_or(CLOSED_FORM_TOL);
    let params = json!({ "group": g.describe(), "tol": tol });
    let fail = |e| (params.clone(), e);
    let k = heat_kernel(&g).map_err(fail)?;
    let mut checks = vec![Check::at_most("|mass - 1|", (k.mass - 1.0).abs(), tol)];
    let mut details = json!({ "kernel": kernel_summary(&k) });
    if !g.is_circle() {
        let exact = SampledSignal::from_fn(&g, |x| (-x * x / 4.0).exp() / (2.0 * PI.sqrt()));
        let heat_err = k.signal.max_abs_diff(&exact);
        let phi = SampledSignal::from_fn(&g, |x| (-x * x).exp());
        let gg = convolve(&phi, &phi).map_err(fail)?;
        let gg_exact = SampledSignal::from_fn(&g, |x| (PI / 2.0).sqrt() * (-x * x / 2.0).exp());
        let conv_err = gg.max_abs_diff(&gg_exact);
        checks.push(Check::at_most("heat kernel vs closed form", heat_err, tol));
        checks.push(Check::at_most("gaussian*gaussian vs closed form", conv_err, tol));
        details["heat_error"] = json!(heat_err);
        details["convolution_error"] = json!(conv_err);
    } else {
        checks.push(Check::flag("kernel positive", k.signal.values.iter().all(|v| v.re > 0.0)));
    }
    Ok((params, Outcome::new(checks, details)))
}

fn factorize_cmd(cfg: &RunConfig) -> Run {
    let g = group(cfg).map_err(|e| (Value::Null, e))?;
    let vname = cfg.vector.clone().unwrap_or_else(|| "lorentzian".into());
    let eps = cfg.eps.unwrap_or(0.25);
    let tol = cfg.tol.unwrap_or(if g.is_circle() { CIRCLE_FACTORIZE_TOL } else { FACTORIZE_TOL });
    let params = json!({ "vector": vname, "eps": eps, "tol": tol, "group": g.describe() });
    let fail = |e| (params.clone(), e);
    let kind = VectorKind::parse(&vname).map_err(fail)?;
    let v = RepVector::of_kind(&BanachRepSpec::translation(&g), &kind).map_err(fail)?;
    let f = factorize(&v, eps).map_err(fail)?;
    let checks = vec![Check::at_most("reconstruction error", f.error, tol)];
    let details = json!({
        "error": f.error,
        "series_terms": f.series.j + 1,
        "series_tail_bound": f.series.tail_bound,
        "series_ratio": f.series.ratio,
        "kappa_alpha": kernel_summary(&f.kappa_alpha),
        "kappa_beta": kernel_summary(&f.kappa_beta),
        "analyticity": f.analyticity,
    });
    Ok((params, Outcome::new(checks, details)))
}

pub fn build_testfn(spec: &str, g: &GroupSpec) -> Result<TestFunction> {
    let (kind, arg) = parse_testfn(spec)?;
    match kind.as_str() {
        "bump" => TestFunction::bump(g, arg.unwrap_or(1.0)),
        "gaussian" => TestFunction::gaussian(g, arg.unwrap_or(1.0)),
        _ => Ok(TestFunction::zero(g)),
    }
}

fn testfn(cfg: &RunConfig) -> Run {
    let g = line_group(cfg, testfn_grid).map_err(|e| (Value::Null, e))?;
    let spec = cfg.testfn.clone().unwrap_or_else(|| "bump".into());
    let m = cfg.m.unwrap_or(8);
    let tol = cfg.tol.unwrap_or(TESTFN_TOL);
    let params = json!({ "testfn": spec, "m": m, "tol": tol, "group": g.describe() });
    let fail = |e| (params.clone(), e);
    let phi = build_testfn(&spec, &g).map_err(fail)?;
    let f = strong_factorize_testfn(&phi, m).map_err(fail)?;
    let probe = psi_regularity_probe(m, m - 2);
    let mut checks = vec![Check::at_most("reconstruction error", f.error, tol)];
    checks.extend(finite_checks(&f.psi_phi_certificate, "Psi_m phi"));
    checks.extend(finite_checks(&f.psi_m_certificate, "psi_m"));
    checks.push(Check::flag(format!("regularity probe k={}", m - 2), probe.pass));
    let details = json!({
        "error": f.error,
        "edge_ratio": f.edge_ratio,
        "psi_phi_sup": f.psi_phi.sup_norm(),
        "psi_m": kernel_summary(&f.psi_m),
        "psi_phi_certificate": f.psi_phi_certificate,
        "psi_m_certificate": f.psi_m_certificate,
        "regularity_probe": probe,
    });
    Ok((params, Outcome::new(checks, details)))
}

fn hyper(cfg: &RunConfig) -> Run {
    let g = group(cfg).map_err(|e| (Value::Null, e))?;
    let vname = cfg.vector.clone().unwrap_or_else(|| "lorentzian".into());
    let (c, r) = (cfg.c.unwrap_or(0.25), cfg.r.unwrap_or(0.75));
    let tol = cfg.tol.unwrap_or(HYPER_TOL);
    let params = json!({ "vector": vname, "c": c, "R": r, "tol": tol, "group": g.describe() });
    let fail = |e| (params.clone(), e);
    let kind = VectorKind::parse(&vname).map_err(fail)?;
    let v = RepVector::of_kind(&BanachRepSpec::translation(&g), &kind).map_err(fail)?;
    let f = strong_factorize_vector(&v, c, r).map_err(fail)?;
    let mut checks = vec![
        Check::at_most("reconstruction error", f.error, tol),
        Check::at_most("contour independence", f.contour_independence, INDEPENDENCE_TOL),
        Check::at_most("inversion normalization", f.inversion_residual, INVERSION_TOL),
    ];
    checks.extend(finite_checks(&f.factor_certificate, "factor kernel"));
    let details = json!({
        "error": f.error,
        "sup_error": f.sup_error,
        "eval_points": f.eval_points,
        "contour_independence": f.contour_independence,
        "inversion_residual": f.inversion_residual,
        "growth_edge": f.growth_edge,
        "factor_kernel": kernel_summary(&f.factor_kernel),
        "factor_certificate": f.factor_certificate,
        "partner_sup": f.partner.data.sup_norm(),
        "analyticity": f.analyticity,
        "contour": f.contour,
    });
    Ok((params, Outcome::new(checks, details)))
}
