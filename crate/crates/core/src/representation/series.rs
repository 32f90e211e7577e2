use super::{analyticity_radius, pi_coeffs, AnalyticityEstimate, Band, RepVector, RELIABLE_SHARE};
use crate::error::{Error, Result};
use crate::multiplier::{chi_from_distance, kernel_of_symbol, regularized_distance, GroupSpec, Kernel, SampledSignal, ShiftPolicy};
use crate::quad::log_sum_exp;
use crate::symbols::EntireSymbol;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::OnceLock;

type C = Complex64;

/// Largest number of cosh-series terms before reporting divergence.
pub const COSH_J_MAX: usize = 60;
const LN_FACT_MAX: usize = 8192;

fn ln_fact(n: usize) -> f64 {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    let t = T.get_or_init(|| {
        let mut v = vec![0.0; LN_FACT_MAX + 1];
        for i in 1..=LN_FACT_MAX {
            v[i] = v[i - 1] + (i as f64).ln();
        }
        v
    });
    t[n.min(LN_FACT_MAX)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeriesVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

fn check_band(v: &RepVector, b: &Band) -> Result<()> {
    let g = &v.rep.group;
    if b.sparse || b.kept.is_empty() {
        return Ok(());
    }
    let vmax = b.spec.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let edge = (0..g.len()).filter(|&k| g.xi(k).abs() >= 0.9 * g.nyquist()).map(|k| b.spec[k].norm()).fold(0.0, f64::max);
    if edge > 1e-12 * vmax {
        return Err(Error::Resolution(format!("{}: |v_hat| near nyquist is {:.2e} of its max", v.id, edge / vmax)));
    }
    Ok(())
}

/// Index of the last j >= 1 in the leading run with top-band share below the
/// reliability threshold (0 if none).
fn reliable_prefix(shares: &[f64]) -> usize {
    let mut last = 0;
    for (j, &s) in shares.iter().enumerate().skip(1) {
        if s < RELIABLE_SHARE {
            last = j;
        } else {
            break;
        }
    }
    last
}

#[derive(Clone, Debug)]
pub struct CoshSeries {
    pub vector: RepVector,
    /// Number of terms kept: the sum runs over j = 0..=j.
    pub j: usize,
    /// Spectral bound on the sup norm of the discarded terms.
    pub tail_bound: f64,
    /// ln of eps^{2j}/(2j)! times the spectral envelope of |Delta^j v|.
    pub ln_terms: Vec<f64>,
    /// Ratio of consecutive envelope terms at the last reliable j.
    pub ratio: Option<f64>,
    pub truncated_modes: usize,
    /// max |Delta^j v (spectral) - Delta^j v (finite differences)| / |Delta^j v|, j = 1..3.
    pub fd_check: Vec<f64>,
    /// Fourier coefficients of the result, before the inverse transform.
    pub spectrum: Vec<C>,
}

/// C_eps v = sum_j eps^{2j}/(2j)! Delta^j v, with Delta^j applied spectrally
/// and J chosen from the spectral tail bound.
pub fn cosh_series_apply(eps: f64, v: &RepVector, budget: f64) -> Result<CoshSeries> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("cosh series needs eps > 0, got {eps}")));
    }
    let g = v.rep.group.clone();
    let b = Band::of(&v.data);
    check_band(v, &b)?;
    let truncated = b.spec.iter().filter(|s| s.norm() > 0.0).count() - b.kept.len();
    let target = budget * v.norm().max(f64::MIN_POSITIVE);
    if b.kept.is_empty() {
        return Ok(CoshSeries {
            vector: v.clone(),
            j: 0,
            tail_bound: 0.0,
            ln_terms: vec![],
            ratio: None,
            truncated_modes: 0,
            fd_check: vec![],
            spectrum: b.spec.clone(),
        });
    }
    // envelope terms until they are negligible
    let peak_j = (0.5 * eps * b.xi_max).ceil() as usize;
    let mut ln_terms = Vec::new();
    let mut shares = Vec::new();
    let mut top = f64::NEG_INFINITY;
    for j in 0..LN_FACT_MAX / 2 {
        let (m, share) = b.moment_ln(&g, 2.0 * j as f64);
        let t = 2.0 * j as f64 * eps.ln() - ln_fact(2 * j) + m;
        ln_terms.push(t);
        shares.push(share);
        top = top.max(t);
        if j > peak_j.max(COSH_J_MAX) && (t < top - 80.0 || t == f64::NEG_INFINITY) {
            break;
        }
    }
    let jr = reliable_prefix(&shares);
    let ratio = if jr >= 2 { Some((ln_terms[jr] - ln_terms[jr - 1]).exp()) } else { None };
    if jr >= 3 {
        let r1 = (ln_terms[jr - 1] - ln_terms[jr - 2]).exp();
        let r2 = ratio.unwrap();
        if r2 >= 1.0 && r2 >= 0.98 * r1 {
            return Err(Error::Divergent(format!(
                "{}: eps = {eps}, envelope ratio {r2:.3} at j = {jr} and not decreasing",
                v.id
            )));
        }
    }
    let ln_target = target.ln();
    let mut j_stop = None;
    let mut tail_bound = 0.0;
    for j in 0..=COSH_J_MAX {
        let tail = log_sum_exp(ln_terms[j + 1..].iter().cloned());
        if tail <= ln_target {
            j_stop = Some(j);
            tail_bound = tail.exp();
            break;
        }
    }
    let Some(jj) = j_stop else {
        let tail = log_sum_exp(ln_terms[COSH_J_MAX + 1..].iter().cloned());
        return Err(Error::Divergent(format!(
            "{}: eps = {eps}, tail bound e^{tail:.1} after {COSH_J_MAX} terms exceeds {target:.1e}",
            v.id
        )));
    };
    let mut out = vec![C::new(0.0, 0.0); g.len()];
    for &k in &b.kept {
        let x2 = (eps * g.xi(k)).powi(2);
        let mut term = 1.0;
        let mut s = 1.0;
        for j in 0..jj {
            term *= x2 / ((2 * j + 1) * (2 * j + 2)) as f64;
            s += term;
        }
        out[k] = b.spec[k] * s;
    }
    let data = SampledSignal::from_spectrum(&g, &out).with_analyticity(v.analyticity);
    let fd = fd_check(v, &b);
    let mut vector = v.clone();
    vector.id = format!("C_{eps}({})", v.id);
    vector.data = data;
    vector.exact = None;
    Ok(CoshSeries { vector, j: jj, tail_bound, ln_terms, ratio, truncated_modes: truncated, fd_check: fd, spectrum: out })
}

fn laplacian_spectral(g: &GroupSpec, b: &Band, j: usize) -> SampledSignal {
    let mut s = vec![C::new(0.0, 0.0); g.len()];
    for &k in &b.kept {
        s[k] = b.spec[k] * g.xi(k).powi(2 * j as i32);
    }
    SampledSignal::from_spectrum(g, &s)
}

fn laplacian_fd(s: &SampledSignal) -> SampledSignal {
    let n = s.values.len();
    let h2 = s.group.h().powi(2);
    let v = &s.values;
    let values = (0..n)
        .map(|i| {
            let at = |d: isize| v[(i as isize + d).rem_euclid(n as isize) as usize];
            -(-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * h2)
        })
        .collect();
    SampledSignal { group: s.group.clone(), values, analyticity: None }
}

/// Relative gap between a five-point Laplacian of Delta^{j-1} v and the
/// spectral Delta^j v, j = 1..3. One step at a time, since iterating the
/// stencil amplifies rounding by 1/h^2 per step.
fn fd_check(v: &RepVector, b: &Band) -> Vec<f64> {
    let g = &v.rep.group;
    (1..=3)
        .map(|j| {
            let fd = laplacian_fd(&laplacian_spectral(g, b, j - 1));
            let sp = laplacian_spectral(g, b, j);
            let n = sp.sup_norm();
            if n == 0.0 {
                fd.sup_norm()
            } else {
                fd.max_abs_diff(&sp) / n
            }
        })
        .collect()
}

/// ln of the sup norm of D^p v applied to kept modes, where D has symbol
/// |xi| (p even gives Delta^{p/2}; odd p is the modulus of the derivative's
/// symbol).
fn ln_norm_power(g: &GroupSpec, b: &Band, p: usize, derivative: bool) -> f64 {
    if b.kept.is_empty() {
        return f64::NEG_INFINITY;
    }
    let scale = b.xi_max.max(1.0);
    let mut s = vec![C::new(0.0, 0.0); g.len()];
    for &k in &b.kept {
        let x = g.xi(k) / scale;
        let m = if derivative { C::new(0.0, x).powi(p as i32) } else { C::new(x.abs().powi(p as i32), 0.0) };
        s[k] = b.spec[k] * m;
    }
    SampledSignal::from_spectrum(g, &s).sup_norm().ln() + p as f64 * scale.ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaAnalyticReport {
    pub eps: f64,
    /// ln of eps^j/(2j)! |Delta^j v|.
    pub ln_terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Computed |Delta^j v| never exceeds the spectral bound.
    pub bound_ok: bool,
    pub reliable_up_to: usize,
    pub ratio: Option<f64>,
    pub verdict: SeriesVerdict,
}

/// Partial sums of sum_j eps^j/(2j)! |Delta^j v| with a ratio verdict taken
/// where the spectral moments are still resolved.
pub fn delta_analytic_check(v: &RepVector, eps: f64, j_max: usize) -> DeltaAnalyticReport {
    let g = &v.rep.group;
    let b = Band::of(&v.data);
    let mut ln_terms = Vec::new();
    let mut shares = Vec::new();
    let mut bound_ok = true;
    for j in 0..=j_max {
        let ln_norm = ln_norm_power(g, &b, 2 * j, false);
        let (bound, share) = b.moment_ln(g, 2.0 * j as f64);
        if ln_norm > bound + 1e-9 {
            bound_ok = false;
        }
        ln_terms.push(j as f64 * eps.ln() - ln_fact(2 * j) + ln_norm);
        shares.push(share);
    }
    let mut partial_sums = Vec::new();
    let mut s = 0.0;
    for t in &ln_terms {
        s += t.exp();
        partial_sums.push(s);
    }
    let zero_beyond = ln_terms.iter().skip(1).all(|t| *t == f64::NEG_INFINITY);
    let jr = reliable_prefix(&shares);
    let ratio = if jr >= 2 { Some((ln_terms[jr] - ln_terms[jr - 1]).exp()) } else { None };
    let verdict = if b.sparse || zero_beyond {
        SeriesVerdict::Convergent
    } else {
        match ratio {
            Some(r) if r < 1.0 => SeriesVerdict::Convergent,
            Some(_) => SeriesVerdict::Divergent,
            None => SeriesVerdict::Inconclusive,
        }
    };
    DeltaAnalyticReport { eps, ln_terms, partial_sums, bound_ok, reliable_up_to: jr, ratio, verdict }
}

#[derive(Clone, Debug)]
pub struct Factorization {
    pub eps: f64,
    /// u = C_eps v.
    pub u: RepVector,
    pub series: CoshSeries,
    pub kappa_alpha: Kernel,
    pub kappa_beta: Kernel,
    /// Pi(kappa_alpha) u + Pi(kappa_beta) v.
    pub reconstruction: RepVector,
    pub error: f64,
    pub analyticity: AnalyticityEstimate,
}

/// v = Pi(kappa_alpha) C_eps v + Pi(kappa_beta) v.
pub fn factorize(v: &RepVector, eps: f64) -> Result<Factorization> {
    factorize_with(v, eps, 1e-13)
}

pub fn factorize_with(v: &RepVector, eps: f64, budget: f64) -> Result<Factorization> {
    let series = cosh_series_apply(eps, v, budget)?;
    let g = &v.rep.group;
    let p = ShiftPolicy::default();
    let ka = kernel_of_symbol(&EntireSymbol::alpha(eps), g, &p)?;
    let kb = kernel_of_symbol(&EntireSymbol::beta(eps), g, &p)?;
    // both terms stay in coefficient space until the final transform, so
    // rounding in u (which can be cosh(eps xi_max) times larger than v)
    // is not reintroduced by a second forward transform
    let vs = v.data.spectrum();
    let a = pi_coeffs(&ka, &series.spectrum)?;
    let bpart = pi_coeffs(&kb, &vs)?;
    let sum: Vec<C> = a.iter().zip(&bpart).map(|(x, y)| x + y).collect();
    let mut reconstruction = v.with_data(SampledSignal::from_spectrum(g, &sum), format!("reconstruction({})", v.id));
    reconstruction.exact = None;
    let error = reconstruction.data.max_abs_diff(&v.data);
    Ok(Factorization {
        eps,
        u: series.vector.clone(),
        series,
        kappa_alpha: ka,
        kappa_beta: kb,
        reconstruction,
        error,
        analyticity: analyticity_radius(v),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFit {
    /// ln |d^k v| for k = 0..=k_max.
    pub ln_norms: Vec<f64>,
    pub reliable_up_to: usize,
    /// max over reliable k >= 1 of (|d^k v| / k!)^{1/k}.
    pub r: f64,
    /// max over reliable k of |d^k v| / (k! R^k).
    pub c_p: f64,
    /// Least-squares slope of ln(|d^k v| / k!) against k, exponentiated.
    pub r_lsq: f64,
    pub pass: bool,
}

/// Fits |d^k v| <= C_p k! R^k over the orders whose spectral moments are resolved.
pub fn derivative_growth_probe(v: &RepVector, k_max: usize) -> GrowthFit {
    let g = &v.rep.group;
    let b = Band::of(&v.data);
    let mut ln_norms = Vec::new();
    let mut shares = Vec::new();
    for k in 0..=k_max {
        ln_norms.push(ln_norm_power(g, &b, k, true));
        shares.push(b.moment_ln(g, k as f64).1);
    }
    let kr = reliable_prefix(&shares);
    let ks: Vec<usize> = (1..=kr).filter(|&k| ln_norms[k].is_finite()).collect();
    let r = ks.iter().map(|&k| ((ln_norms[k] - ln_fact(k)) / k as f64).exp()).fold(0.0, f64::max);
    let c_p = (0..=kr)
        .filter(|&k| ln_norms[k].is_finite())
        .map(|k| (ln_norms[k] - ln_fact(k) - k as f64 * r.ln()).exp())
        .fold(0.0, f64::max);
    let r_lsq = {
        let pts: Vec<(f64, f64)> = (0..=kr).filter(|&k| ln_norms[k].is_finite()).map(|k| (k as f64, ln_norms[k] - ln_fact(k))).collect();
        let n = pts.len() as f64;
        if pts.len() >= 2 {
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            (sxy / sxx).exp()
        } else {
            f64::NAN
        }
    };
    let pass = (b.sparse || ks.len() >= 2) && r.is_finite() && c_p.is_finite();
    GrowthFit { ln_norms, reliable_up_to: kr, r, c_p, r_lsq, pass }
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffRow {
    pub delta: f64,
    /// (radius, sup over d(g) <= radius of |chi v - v|).
    pub compact_errors: Vec<(f64, f64)>,
    pub pipeline_residual: Option<f64>,
    pub error_code: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffReport {
    pub eps: f64,
    pub rows: Vec<CutoffRow>,
    /// Compact errors do not increase as delta decreases.
    pub monotone: bool,
}

/// chi_delta v -> v as delta decreases, and the factorization residual of chi_delta v.
pub fn cutoff_convergence_probe(v: &RepVector, deltas: &[f64], eps: f64) -> Result<CutoffReport> {
    let g = &v.rep.group;
    let d = regularized_distance(g)?.signal;
    let radii: Vec<f64> = if g.is_circle() { vec![std::f64::consts::PI] } else { vec![5.0, 10.0, 20.0] };
    let mut ds = deltas.to_vec();
    ds.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::new();
    for delta in ds {
        let chi = if delta == 0.0 { SampledSignal::from_fn(g, |_| 1.0) } else { chi_from_distance(delta, &d) };
        let w = chi.mul(&v.data);
        let diff = w.sub(&v.data);
        let compact_errors = radii.iter().map(|&r| (r, diff.sup_within(r))).collect();
        let wv = RepVector::new(&v.rep, &format!("chi_{delta}({})", v.id), w)?;
        let (pipeline_residual, error_code) = match factorize(&wv, eps) {
            Ok(f) => (Some(f.error), None),
            Err(e) => (None, Some(e.code().to_string())),
        };
        rows.push(CutoffRow { delta, compact_errors, pipeline_residual, error_code });
    }
    let monotone = rows.windows(2).all(|w| {
        w[0].compact_errors.iter().zip(&w[1].compact_errors).all(|(a, b)| b.1 <= a.1 + 1e-15)
    });
    Ok(CutoffReport { eps, rows, monotone })
}
