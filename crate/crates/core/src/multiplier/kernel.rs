use super::{GroupSpec, SampledSignal};
use crate::certificate::{judge, judge_compact, DecayCertificate};
use crate::error::{Error, Result};
use crate::quad::{log_sum_exp, GaussLegendre};
use crate::symbols::EntireSymbol;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

type C = Complex64;

/// Where and how far to shift the inversion contour on the line.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShiftPolicy {
    /// Beyond this |x| the kernel comes from the shifted contour.
    pub x_switch: f64,
    /// Width of the x-bands that share one shift.
    pub band: f64,
    pub enabled: bool,
    /// Accept symbols that have not decayed at Nyquist (controls only).
    pub allow_unresolved: bool,
    /// |f(nyquist)| / max|f| must not exceed this.
    pub resolution_tol: f64,
}

impl Default for ShiftPolicy {
    fn default() -> Self {
        ShiftPolicy { x_switch: 12.0, band: 4.0, enabled: true, allow_unresolved: false, resolution_tol: 1e-14 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShiftBand {
    pub x_from: f64,
    pub sigma: f64,
    /// Rounding floor eps * B(sigma) e^{-sigma x} at the band start.
    pub floor: f64,
}

#[derive(Clone, Debug)]
pub struct Kernel {
    pub signal: SampledSignal,
    pub symbol: EntireSymbol,
    pub certificates: Vec<DecayCertificate>,
    /// kappa(x) = kappa(-x) and Im kappa = 0 up to 1e-12 relative.
    pub symmetric: bool,
    pub evenness_defect: (f64, f64),
    /// Trapezoid integral of the kernel; should equal f(0).
    pub mass: f64,
    pub symbol_at_zero: C,
    /// max |FFT - contour| on [x_switch - 1, x_switch].
    pub overlap_residual: Option<f64>,
    pub bands: Vec<ShiftBand>,
    /// max |kappa| on the outer tenth of the window over sup |kappa|; large
    /// values mean the kernel is wider than the window.
    pub edge_ratio: f64,
    /// Exact Fourier coefficients, kept on the circle where they are just
    /// the symbol at integer frequencies.
    pub spectrum: Option<Vec<C>>,
}

fn symbol_spectrum(f: &EntireSymbol, group: &GroupSpec, sigma: f64) -> Vec<C> {
    let n = group.len();
    if sigma == 0.0 {
        // even symbol: evaluate on |xi| once and mirror
        let mut s = vec![C::new(0.0, 0.0); n];
        for k in 0..=n / 2 {
            s[k] = f.eval(C::new(group.xi(k).abs(), 0.0));
        }
        for k in n / 2 + 1..n {
            s[k] = s[n - k];
        }
        s
    } else {
        (0..n).map(|k| f.eval(C::new(group.xi(k), sigma))).collect()
    }
}

fn resolution_ratio(spec: &[C]) -> f64 {
    let n = spec.len();
    let max = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    spec[n / 2].norm() / max
}

/// kappa_f = (2 pi)^{-1} int f(xi) e^{i x xi} d xi on the grid, with the tail
/// |x| >= x_switch recomputed on shifted contours on the line.
pub fn kernel_of_symbol(f: &EntireSymbol, group: &GroupSpec, policy: &ShiftPolicy) -> Result<Kernel> {
    f.check_even()?;
    let spec = symbol_spectrum(f, group, 0.0);
    if spec.iter().any(|v| !v.is_finite()) {
        return Err(Error::Resolution(format!("{} is not finite on the frequency grid", f.name())));
    }
    let ratio = resolution_ratio(&spec);
    if ratio > policy.resolution_tol && !policy.allow_unresolved {
        return Err(Error::Resolution(format!(
            "|{}(nyquist = {:.1})| / max = {ratio:.3e} > {:.1e}",
            f.name(),
            group.nyquist(),
            policy.resolution_tol
        )));
    }
    kernel_from_spectrum(f, group, policy, &spec)
}

/// As `kernel_of_symbol` with the real-axis spectrum already sampled.
pub fn kernel_from_spectrum(f: &EntireSymbol, group: &GroupSpec, policy: &ShiftPolicy, spec: &[C]) -> Result<Kernel> {
    let mut signal = SampledSignal::from_spectrum(group, spec);
    let mut overlap_residual = None;
    let mut bands = Vec::new();
    if !group.is_circle() && policy.enabled && f.contour_shift(policy.x_switch) > 0.0 {
        let (ov, b) = shift_tail(f, group, policy, &mut signal)?;
        overlap_residual = ov;
        bands = b;
    }
    let sup = signal.sup_norm().max(1e-300);
    let defect = signal.evenness_defect();
    let symmetric = defect.0 <= 1e-12 * sup && defect.1 <= 1e-12 * sup;
    let mass = signal.integral().re;
    let edge = (0..group.len())
        .filter(|&j| group.dist(j) >= 0.9 * group.half_period())
        .map(|j| signal.values[j].norm())
        .fold(0.0, f64::max);
    Ok(Kernel {
        edge_ratio: if group.is_circle() { 0.0 } else { edge / sup },
        signal,
        symbol: f.clone(),
        certificates: Vec::new(),
        symmetric,
        evenness_defect: defect,
        mass,
        symbol_at_zero: f.eval(C::new(0.0, 0.0)),
        overlap_residual,
        bands,
        spectrum: group.is_circle().then(|| spec.to_vec()),
    })
}

fn shift_tail(
    f: &EntireSymbol,
    group: &GroupSpec,
    policy: &ShiftPolicy,
    signal: &mut SampledSignal,
) -> Result<(Option<f64>, Vec<ShiftBand>)> {
    let n = group.len();
    let start = policy.x_switch - 1.0;
    let band_of = |x: f64| start + policy.band * ((x - start) / policy.band).floor();
    // distinct shifts, keyed by their bit pattern for a deterministic order
    let mut by_sigma: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for j in 1..n / 2 {
        let x = group.coord(j);
        if x >= start {
            let s = f.contour_shift(band_of(x));
            by_sigma.entry(s.to_bits()).or_default().push(j);
        }
    }
    let mut overlap: f64 = 0.0;
    let mut saw_overlap = false;
    let mut bands = Vec::new();
    let l1 = |spec: &[C]| spec.iter().map(|v| v.norm()).sum::<f64>() / (n as f64 * group.h());
    let b0 = l1(&symbol_spectrum(f, group, 0.0));
    for (bits, idx) in by_sigma {
        let mut sigma = f64::from_bits(bits);
        let x0 = group.coord(idx[0]);
        let mut spec = symbol_spectrum(f, group, sigma);
        let mut tries = 0;
        // a shift that raises the rounding floor (a sharp peak off the axis) is worse than none
        let bad = |spec: &[C], sigma: f64| {
            spec.iter().any(|v| !v.is_finite())
                || resolution_ratio(spec) > policy.resolution_tol
                || l1(spec) * (-sigma * x0).exp() > b0
        };
        while bad(&spec, sigma) && tries < 6 {
            sigma *= 0.5;
            spec = symbol_spectrum(f, group, sigma);
            tries += 1;
        }
        if bad(&spec, sigma) || sigma <= 0.0 {
            continue;
        }
        let k_sigma = SampledSignal::from_spectrum(group, &spec);
        let b_sigma = l1(&spec);
        bands.push(ShiftBand { x_from: x0, sigma, floor: f64::EPSILON * b_sigma * (-sigma * x0).exp() });
        for j in idx {
            let x = group.coord(j);
            // combine in log space: both factors can leave f64 range
            let kv = k_sigma.values[j].re;
            let v = C::new(kv.signum() * (kv.abs().ln() - sigma * x).exp(), 0.0);
            if x < policy.x_switch {
                overlap = overlap.max((v - signal.values[j]).norm());
                saw_overlap = true;
            } else {
                signal.values[j] = v;
                signal.values[n - j] = v;
            }
        }
    }
    Ok((if saw_overlap { Some(overlap) } else { None }, bands))
}

/// ln((2 pi)^{-1} int |f(xi + i n)| d xi), the shifted-contour bound on
/// sup e^{n|x|} |kappa_f(x)|. None when the line Im = n leaves the strip.
pub fn contour_bound_ln(f: &EntireSymbol, n: f64) -> Option<f64> {
    if !(n < f.strip) || !f.decaying {
        return None;
    }
    line_integral_ln(n, &|z| f.ln_abs(z))
}

/// ln((2 pi)^{-1} int |F(xi + i n)| d xi) for an even F given by ln|F|.
/// None if ln|F| is NaN or +inf anywhere it is sampled.
pub fn line_integral_ln(n: f64, ln_abs: &dyn Fn(C) -> f64) -> Option<f64> {
    let g = GaussLegendre::new(20);
    let mut terms: Vec<f64> = Vec::new();
    let panel = |a: f64, b: f64, terms: &mut Vec<f64>| -> Option<f64> {
        let mut local = Vec::with_capacity(40);
        for (x, w) in g.on(a, b) {
            for s in [1.0, -1.0] {
                let l = ln_abs(C::new(s * x, n));
                if l.is_nan() || l == f64::INFINITY {
                    return None;
                }
                local.push(w.ln() + l);
            }
        }
        let p = log_sum_exp(local.iter().cloned());
        terms.extend(local);
        Some(p)
    };
    for i in 0..64 {
        panel(i as f64, i as f64 + 1.0, &mut terms)?;
    }
    let mut a = 64.0;
    let mut quiet = 0;
    while a < 1.7e10 {
        let mut p = f64::NEG_INFINITY;
        for i in 0..16 {
            let lo = a + a * i as f64 / 16.0;
            p = p.max(panel(lo, lo + a / 16.0, &mut terms)?);
        }
        let total = log_sum_exp(terms.iter().cloned());
        if p < total - 40.0 {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        a *= 2.0;
    }
    Some(log_sum_exp(terms) - (2.0 * PI).ln())
}

/// Per-weight suprema of e^{n d(g)} |kappa(g)| for d(g) <= radius.
pub fn decay_certificate_kernel(k: &Kernel, n_list: &[f64], radius: f64) -> DecayCertificate {
    let f = k.symbol.clone();
    decay_certificate_signal(&k.signal, n_list, radius, &format!("kernel of {}", f.name()), &|n| contour_bound_ln(&f, n))
}

/// Certificate for any sampled function, with an optional analytic bound per weight.
pub fn decay_certificate_signal(
    s: &SampledSignal,
    n_list: &[f64],
    radius: f64,
    subject: &str,
    bound: &dyn Fn(f64) -> Option<f64>,
) -> DecayCertificate {
    let g = &s.group;
    let entries = n_list
        .iter()
        .map(|&n| {
            let samples = (0..g.len()).filter(|&j| g.dist(j) <= radius).map(|j| {
                let d = g.dist(j);
                (d, s.values[j].norm().ln() + n * d, (g.coord(j), 0.0))
            });
            if g.is_circle() {
                judge_compact(n, samples)
            } else {
                judge(n, radius, samples, bound(n))
            }
        })
        .collect();
    DecayCertificate::new(subject, if g.is_circle() { PI } else { radius }, entries)
}
