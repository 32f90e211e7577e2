//! The acceptance matrix. `report-all` runs it and `tests/acceptance.rs`
//! asserts on it, so both see the same numbers.

pub use super::pipelines::{CLOSED_FORM_TOL, HYPER_TOL, IDENTITY_TOL, INDEPENDENCE_TOL, INVERSION_TOL, TESTFN_TOL};
use super::pipelines::{self, finite_checks, identity_scan, lorentzian_control, IDENTITY_EPS};
use super::{Check, Entry, Outcome, RunConfig};
use crate::certificate::Verdict;
use crate::error::{Error, Result};
use crate::multiplier::{
    apply_multiplier, convolve, decay_certificate_kernel, heat_kernel, kernel_of_symbol, regularized_distance, wave_crosscheck, GroupSpec,
    SampledSignal, ShiftPolicy,
};
use crate::representation::{
    cosh_series_apply, delta_analytic_check, factorize, pi_apply, BanachRepSpec, RepVector, SeriesVerdict, VectorKind,
};
use crate::strongfact::{psi_regularity_probe, strong_factorize_testfn, strong_factorize_vector, testfn_grid, TestFunction};
use crate::symbols::EntireSymbol;
use serde_json::{json, Value};
use std::f64::consts::PI;

pub const WAVE_TOL: f64 = 1e-8;
pub const DISTANCE_TOL: f64 = 1e-10;
pub const MODE_TOL: f64 = 1e-11;
pub const LORENTZIAN_TOL: f64 = 1e-7;
pub const SERIES_TOL: f64 = 1e-9;
pub const ALGEBRA_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    Numbered(u8),
    /// Negative control: the Lorentzian kernel asked for an n = 2 certificate.
    Control,
}

impl Criterion {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "control" => Ok(Criterion::Control),
            _ => match s.parse::<u8>() {
                Ok(n) if (1..=11).contains(&n) => Ok(Criterion::Numbered(n)),
                _ => Err(Error::Config(format!("unknown criterion {s:?}"))),
            },
        }
    }

    pub fn id(&self) -> String {
        match self {
            Criterion::Numbered(n) => n.to_string(),
            Criterion::Control => "control".into(),
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            Criterion::Numbered(1) => "key identity residual",
            Criterion::Numbered(2) => "kernel decay certificates",
            Criterion::Numbered(3) => "closed-form kernel oracles",
            Criterion::Numbered(4) => "wave cross-check",
            Criterion::Numbered(5) => "regularized distance",
            Criterion::Numbered(6) => "main factorization",
            Criterion::Numbered(7) => "cosh series vs multiplier",
            Criterion::Numbered(8) => "delta-analyticity co-occurrence",
            Criterion::Numbered(9) => "strong factorization of test functions",
            Criterion::Numbered(10) => "hyperfunction strong factorization",
            Criterion::Numbered(11) => "algebra structure",
            Criterion::Numbered(_) => "unknown",
            Criterion::Control => "negative control (must fail)",
        }
    }

    pub fn run(&self) -> Outcome {
        let r = match self {
            Criterion::Numbered(1) => Ok(c1_identity(0)),
            Criterion::Numbered(2) => c2_kernel_decay(),
            Criterion::Numbered(3) => c3_closed_forms(),
            Criterion::Numbered(4) => c4_wave(),
            Criterion::Numbered(5) => c5_distance(),
            Criterion::Numbered(6) => c6_factorization(),
            Criterion::Numbered(7) => c7_series(),
            Criterion::Numbered(8) => c8_delta_analytic(),
            Criterion::Numbered(9) => c9_testfn(),
            Criterion::Numbered(10) => c10_hyper(),
            Criterion::Numbered(11) => c11_algebra(),
            Criterion::Numbered(n) => Err(Error::Config(format!("no criterion {n}"))),
            Criterion::Control => Ok(control()),
        };
        r.unwrap_or_else(|e| Outcome::failed(&e, Value::Null))
    }

    pub fn entry(&self) -> Entry {
        Entry { id: self.id(), title: self.title().into(), outcome: self.run() }
    }
}

pub fn default_matrix() -> Vec<Criterion> {
    (1..=11).map(Criterion::Numbered).collect()
}

pub(crate) fn report_all(cfg: &RunConfig) -> (Value, Vec<Entry>) {
    let matrix = match &cfg.matrix {
        // validated before dispatch
        Some(m) => m.iter().map(|s| Criterion::parse(s).expect("validated matrix")).collect(),
        None => default_matrix(),
    };
    let params = json!({ "matrix": matrix.iter().map(|c| c.id()).collect::<Vec<_>>() });
    (params, matrix.iter().map(|c| c.entry()).collect())
}

fn line() -> GroupSpec {
    GroupSpec::default_line()
}

fn line_vector(kind: VectorKind) -> Result<RepVector> {
    RepVector::of_kind(&BanachRepSpec::translation(&line()), &kind)
}

fn circle_vector(kind: VectorKind) -> Result<RepVector> {
    RepVector::of_kind(&BanachRepSpec::translation(&GroupSpec::circle(256)?), &kind)
}

fn c1_identity(seed: u64) -> Outcome {
    let s = identity_scan(&IDENTITY_EPS, seed);
    let checks = vec![
        Check::at_most("absolute residual", s.max_absolute, IDENTITY_TOL),
        Check::at_most("scaled residual", s.max_scaled, IDENTITY_TOL),
    ];
    Outcome::new(checks, json!(s))
}

fn c2_kernel_decay() -> Result<Outcome> {
    let k = kernel_of_symbol(&EntireSymbol::alpha(0.1), &line(), &ShiftPolicy::default())?;
    let cert = decay_certificate_kernel(&k, &[1.0, 2.0, 3.0, 4.0], 8.0);
    let mut checks = finite_checks(&cert, "kappa_alpha(0.1)");
    let control = lorentzian_control(&line(), &[2.0], 8.0);
    checks.push(Check::flag("lorentzian control n=2 not certified", control.verdict != Verdict::Finite));
    Ok(Outcome::new(checks, json!({ "certificate": cert, "control": control })))
}

fn c3_closed_forms() -> Result<Outcome> {
    let g = line();
    let k = heat_kernel(&g)?;
    let exact = SampledSignal::from_fn(&g, |x| (-x * x / 4.0).exp() / (2.0 * PI.sqrt()));
    let heat_err = k.signal.max_abs_diff(&exact);
    let phi = SampledSignal::from_fn(&g, |x| (-x * x).exp());
    let gg = convolve(&phi, &phi)?;
    let gg_exact = SampledSignal::from_fn(&g, |x| (PI / 2.0).sqrt() * (-x * x / 2.0).exp());
    let conv_err = gg.max_abs_diff(&gg_exact);
    let checks = vec![
        Check::at_most("heat kernel sup error", heat_err, CLOSED_FORM_TOL),
        Check::at_most("gaussian*gaussian sup error", conv_err, CLOSED_FORM_TOL),
    ];
    Ok(Outcome::new(checks, json!({ "heat_error": heat_err, "convolution_error": conv_err })))
}

fn c4_wave() -> Result<Outcome> {
    let modes: Vec<i64> = (0..=10).collect();
    let mut checks = Vec::new();
    let mut details = serde_json::Map::new();
    for (name, f) in [("heat", EntireSymbol::heat()), ("alpha(0.5)", EntireSymbol::alpha(0.5))] {
        let rs = wave_crosscheck(&f, &modes)?;
        let worst = rs.iter().map(|r| r.residual).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("{name} max residual k<=10"), worst, WAVE_TOL));
        details.insert(name.into(), json!(rs.iter().map(|r| (r.k, r.residual)).collect::<Vec<_>>()));
    }
    Ok(Outcome::new(checks, Value::Object(details)))
}

fn c5_distance() -> Result<Outcome> {
    let g = line();
    let d = regularized_distance(&g)?;
    let mut d0 = f64::NAN;
    let (mut sup, mut arg) = (0.0f64, f64::NAN);
    for j in 0..g.len() {
        let x = g.coord(j);
        if x == 0.0 {
            d0 = d.signal.values[j].re;
        }
        if x.abs() <= 50.0 {
            let gap = (d.signal.values[j].re - x.abs()).abs();
            if gap > sup {
                sup = gap;
                arg = x;
            }
        }
    }
    let checks = vec![
        Check::at_most("|d(0) - 2/sqrt(pi)|", (d0 - 2.0 / PI.sqrt()).abs(), DISTANCE_TOL),
        Check::flag("sup |d - |x|| on [-50,50] attained at 0", arg == 0.0),
        Check::flag("sup finite", sup.is_finite()),
    ];
    Ok(Outcome::new(checks, json!({ "d0": d0, "sup_gap": sup, "argmax": arg })))
}

fn c6_factorization() -> Result<Outcome> {
    let mut worst = (0.0f64, 0i64);
    for k in -32..=32 {
        let e = factorize(&circle_vector(VectorKind::Mode { k })?, 0.5)?.error;
        if e > worst.0 {
            worst = (e, k);
        }
    }
    let lor = line_vector(VectorKind::Lorentzian { b: 1.0, shift: 0.0 })?;
    let le = factorize(&lor, 0.25)?.error;
    let divergent = factorize(&lor, 2.0).err();
    let code = divergent.as_ref().map(|e| e.code());
    let checks = vec![
        Check::at_most("circle modes |k|<=32, eps=0.5", worst.0, MODE_TOL),
        Check::at_most("lorentzian, eps=0.25", le, LORENTZIAN_TOL),
        Check::flag("lorentzian, eps=2 fails DIVERGENT", code == Some("DIVERGENT")),
    ];
    let details = json!({
        "worst_mode": { "k": worst.1, "error": worst.0 },
        "lorentzian_error": le,
        "eps2_error": divergent.as_ref().map(super::ErrorPayload::from),
    });
    Ok(Outcome::new(checks, details))
}

/// The analytic test set shared by the series criteria.
fn analytic_set() -> Result<Vec<(RepVector, f64)>> {
    let lor = |b, shift| line_vector(VectorKind::Lorentzian { b, shift });
    Ok(vec![
        (lor(1.0, 0.0)?, 0.25),
        (lor(1.0, 0.0)?, 0.1),
        (lor(1.5, 2.5)?, 0.3),
        (lor(2.0, -4.0)?, 0.35),
        (line_vector(VectorKind::Gaussian { a: 1.0, shift: 0.0 })?, 0.5),
        (line_vector(VectorKind::Gaussian { a: 0.3, shift: 1.0 })?, 0.5),
        (circle_vector(VectorKind::Mode { k: 0 })?, 0.7),
        (circle_vector(VectorKind::Mode { k: 3 })?, 0.7),
        (circle_vector(VectorKind::Mode { k: 17 })?, 0.5),
    ])
}

fn c7_series() -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (v, eps) in analytic_set()? {
        let series = cosh_series_apply(eps, &v, 1e-13)?;
        let direct = apply_multiplier(&EntireSymbol::cosh(eps), &v.data)?;
        let d = series.vector.data.max_abs_diff(&direct);
        worst = worst.max(d);
        rows.push(json!({ "vector": v.id, "eps": eps, "difference": d, "terms": series.j + 1 }));
    }
    Ok(Outcome::new(vec![Check::at_most("max |series - multiplier|", worst, SERIES_TOL)], json!(rows)))
}

fn c8_delta_analytic() -> Result<Outcome> {
    let vs = [
        line_vector(VectorKind::Lorentzian { b: 1.0, shift: 0.0 })?,
        line_vector(VectorKind::Gaussian { a: 1.0, shift: 0.0 })?,
        circle_vector(VectorKind::Mode { k: 3 })?,
    ];
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for v in &vs {
        for eps in [0.25, 0.5, 1.5, 2.0] {
            let ok = factorize(v, eps).is_ok();
            let conv = delta_analytic_check(v, eps, 30).verdict == SeriesVerdict::Convergent;
            mismatches += (ok != conv) as usize;
            rows.push(json!({ "vector": v.id, "eps": eps, "factorize_ok": ok, "delta_convergent": conv }));
        }
    }
    Ok(Outcome::new(vec![Check::at_most("mismatched (v, eps) pairs", mismatches as f64, 0.0)], json!(rows)))
}

fn c9_testfn() -> Result<Outcome> {
    let phi = TestFunction::bump(&testfn_grid(), 1.0)?;
    let f = strong_factorize_testfn(&phi, 8)?;
    let mut checks = vec![Check::at_most("bump m=8 error", f.error, TESTFN_TOL)];
    checks.extend(finite_checks(&f.psi_phi_certificate, "Psi_8 phi"));
    checks.extend(finite_checks(&f.psi_m_certificate, "psi_8"));
    let mut probes = Vec::new();
    for k in 0..=4 {
        let below = psi_regularity_probe(k + 1, k);
        let at = psi_regularity_probe(k + 2, k);
        checks.push(Check::flag(format!("probe k={k}: m={} fails, m={} passes", k + 1, k + 2), !below.pass && at.pass));
        probes.push(json!({ "k": k, "below": below, "at": at }));
    }
    let details = json!({
        "error": f.error,
        "psi_phi_certificate": f.psi_phi_certificate,
        "psi_m_certificate": f.psi_m_certificate,
        "probes": probes,
    });
    Ok(Outcome::new(checks, details))
}

fn c10_hyper() -> Result<Outcome> {
    let v = line_vector(VectorKind::Lorentzian { b: 1.0, shift: 0.0 })?;
    let f = strong_factorize_vector(&v, 0.25, 0.75)?;
    let checks = vec![
        Check::at_most("reconstruction error", f.error, HYPER_TOL),
        Check::at_most("contour independence", f.contour_independence, INDEPENDENCE_TOL),
        Check::at_most("inversion normalization", f.inversion_residual, INVERSION_TOL),
    ];
    let details = json!({
        "error": f.error,
        "sup_error": f.sup_error,
        "contour_independence": f.contour_independence,
        "inversion_residual": f.inversion_residual,
        "factor_kernel": pipelines::kernel_summary(&f.factor_kernel),
    });
    Ok(Outcome::new(checks, details))
}

fn c11_algebra() -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut details = serde_json::Map::new();
    for g in [line(), GroupSpec::circle(256)?] {
        let tag = if g.is_circle() { "circle" } else { "line" };
        let p = ShiftPolicy::default();
        let a = kernel_of_symbol(&EntireSymbol::alpha(0.3), &g, &p)?.signal;
        let b = heat_kernel(&g)?.signal;
        let c = if g.is_circle() {
            SampledSignal::from_fn(&g, |x| (-2.0 * x.sin().powi(2)).exp())
        } else {
            SampledSignal::from_fn(&g, |x| (-(x - 1.0) * (x - 1.0)).exp())
        };
        let assoc = convolve(&convolve(&a, &b)?, &c)?.max_abs_diff(&convolve(&a, &convolve(&b, &c)?)?);
        let kind = if g.is_circle() { VectorKind::Mode { k: 2 } } else { VectorKind::Lorentzian { b: 1.0, shift: 0.0 } };
        let v = RepVector::of_kind(&BanachRepSpec::translation(&g), &kind)?;
        let lhs = pi_apply(&convolve(&a, &b)?, &v)?;
        let rhs = pi_apply(&a, &pi_apply(&b, &v)?)?;
        let hom = lhs.data.max_abs_diff(&rhs.data);
        checks.push(Check::at_most(format!("{tag} convolution associativity"), assoc, ALGEBRA_TOL));
        checks.push(Check::at_most(format!("{tag} Pi homomorphism"), hom, ALGEBRA_TOL));
        details.insert(tag.into(), json!({ "associativity": assoc, "homomorphism": hom }));
    }
    Ok(Outcome::new(checks, Value::Object(details)))
}

fn control() -> Outcome {
    let cert = lorentzian_control(&line(), &[2.0], 8.0);
    Outcome::new(finite_checks(&cert, "lorentzian kernel"), json!({ "certificate": cert }))
}
