//! Strong factorizations: test functions as a single convolution of two
//! superexponentially decaying factors, and analytic vectors of translation
//! representations as a single Pi(phi) w.

use crate::certificate::DecayCertificate;
use crate::error::{Error, Result};
use crate::multiplier::{
    decay_certificate_kernel, decay_certificate_signal, kernel_from_spectrum, line_integral_ln, GroupSpec, Kernel,
    SampledSignal, ShiftPolicy,
};
use crate::quad::{log_sum_exp, GaussLegendre};
use crate::symbols::{smoothed_log, EntireSymbol};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

mod hyper;

pub use hyper::{
    contour_fourier_minus, contour_fourier_plus, strong_factorize_vector, ContourTransform, HyperFactorization, TAIL_TOL,
};

type C = Complex64;

/// Grid for the test-function factorization: wide enough that Psi_m phi has
/// decayed below 1e-13 of its sup on the outer tenth for m <= 8.
pub fn testfn_grid() -> GroupSpec {
    GroupSpec::real_line(32.0, 1 << 18).expect("static grid")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TestKind {
    /// e^{-1/(1-(x/r)^2)} on |x| < r.
    Bump { radius: f64 },
    /// e^{-a x^2}, a numerical stand-in for a compactly supported function.
    Gaussian { a: f64 },
    Zero,
}

#[derive(Clone)]
pub struct TestFunction {
    pub kind: TestKind,
    pub signal: SampledSignal,
    /// Radius outside which the function is 0 (Gaussian: below 1e-15).
    pub support: f64,
    /// Fourier transform at the grid frequencies, from a closed form or a
    /// contour integral rather than from the samples.
    pub spectrum: Vec<C>,
    /// (xi, ln |phi_hat(xi)|) at a few decades: the smoothness budget.
    pub decay_record: Vec<(f64, f64)>,
    rule: Option<Arc<BumpRule>>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TestFunction({:?})", self.kind)
    }
}

/// Nodes of the deformed path X(t) = t - i (1 - t^2)/2 through the lower half
/// plane, with weights w X'(t) b(X(t)) folded in.
struct BumpRule {
    nodes: Vec<(C, C)>,
}

impl BumpRule {
    fn new() -> Self {
        let g = GaussLegendre::new(24);
        let mut edges = vec![0.0];
        let mut s = 0.5;
        while s > 1e-7 {
            edges.push(1.0 - s);
            s *= 0.5;
        }
        edges.push(1.0);
        let mut all: Vec<f64> = edges.iter().rev().map(|e| -e).collect();
        all.extend(edges.iter().skip(1));
        let mut nodes = Vec::new();
        for w in all.windows(2) {
            for (t, wt) in g.on(w[0], w[1]) {
                let x = C::new(t, -0.5 * (1.0 - t * t));
                let dx = C::new(1.0, t);
                let b = (-1.0 / (1.0 - x * x)).exp();
                nodes.push((x, b * dx * wt));
            }
        }
        BumpRule { nodes }
    }

    /// int_{-1}^{1} b(x) e^{-i x zeta} dx for Re zeta >= 0 (the path keeps
    /// e^{-i X zeta} bounded there); other zeta by evenness.
    fn transform(&self, zeta: C) -> C {
        let z = if zeta.re < 0.0 { -zeta } else { zeta };
        self.nodes.iter().map(|(x, w)| w * (-C::i() * x * z).exp()).sum()
    }

    /// transform(k * step) for k = 0..count, stepping each node's phasor by
    /// multiplication and reseeding it exactly every 256 steps.
    fn transform_uniform(&self, step: f64, count: usize) -> Vec<C> {
        const RESEED: usize = 256;
        let mut out = vec![C::new(0.0, 0.0); count];
        for (x, w) in &self.nodes {
            let rot = (-C::i() * x * step).exp();
            let mut k = 0;
            while k < count {
                let mut p = w * (-C::i() * x * (k as f64 * step)).exp();
                for o in out[k..(k + RESEED).min(count)].iter_mut() {
                    *o += p;
                    p *= rot;
                }
                k += RESEED;
            }
        }
        out
    }
}

impl TestFunction {
    pub fn bump(group: &GroupSpec, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || radius >= 0.9 * group.half_period() {
            return Err(Error::Domain(format!("bump radius {radius} must be in (0, 0.9 L)")));
        }
        let rule = Arc::new(BumpRule::new());
        let signal = SampledSignal::from_fn(group, |x| {
            let u = x / radius;
            if u.abs() < 1.0 {
                (-1.0 / (1.0 - u * u)).exp()
            } else {
                0.0
            }
        });
        let n = group.len();
        let half = rule.transform_uniform(radius * group.xi(1), n / 2 + 1);
        let spectrum = even_spectrum(group, |xi| radius * half[(xi / group.xi(1)).round() as usize]);
        Ok(Self::finish(TestKind::Bump { radius }, signal, radius, spectrum, Some(rule)))
    }

    pub fn gaussian(group: &GroupSpec, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain(format!("gaussian needs a > 0, got {a}")));
        }
        let signal = SampledSignal::from_fn(group, |x| (-a * x * x).exp());
        let spectrum = even_spectrum(group, |xi| C::new((PI / a).sqrt() * (-xi * xi / (4.0 * a)).exp(), 0.0));
        let support = (35.0 / a).sqrt();
        Ok(Self::finish(TestKind::Gaussian { a }, signal, support, spectrum, None))
    }

    pub fn zero(group: &GroupSpec) -> Self {
        Self::finish(TestKind::Zero, SampledSignal::zeros(group), 0.0, vec![C::new(0.0, 0.0); group.len()], None)
    }

    fn finish(kind: TestKind, signal: SampledSignal, support: f64, spectrum: Vec<C>, rule: Option<Arc<BumpRule>>) -> Self {
        let mut t = TestFunction { kind, signal, support, spectrum, decay_record: Vec::new(), rule };
        let ny = t.signal.group.nyquist();
        t.decay_record = [1.0, 10.0, 100.0, 1000.0, 10000.0]
            .into_iter()
            .filter(|&x| x <= ny)
            .map(|x| (x, t.spectrum_at(C::new(x, 0.0)).norm().ln()))
            .collect();
        t
    }

    /// The entire extension of phi_hat.
    pub fn spectrum_at(&self, zeta: C) -> C {
        match self.kind {
            TestKind::Bump { radius } => radius * self.rule.as_ref().expect("bump rule").transform(radius * zeta),
            TestKind::Gaussian { a } => (PI / a).sqrt() * (-zeta * zeta / (4.0 * a)).exp(),
            TestKind::Zero => C::new(0.0, 0.0),
        }
    }

    pub fn id(&self) -> String {
        match self.kind {
            TestKind::Bump { radius } => format!("bump(r={radius})"),
            TestKind::Gaussian { a } => format!("gaussian(a={a})"),
            TestKind::Zero => "zero".into(),
        }
    }
}

fn even_spectrum<F: Fn(f64) -> C>(group: &GroupSpec, f: F) -> Vec<C> {
    let n = group.len();
    let mut s = vec![C::new(0.0, 0.0); n];
    for k in 0..=n / 2 {
        s[k] = f(group.xi(k).abs());
    }
    for k in n / 2 + 1..n {
        s[k] = s[n - k];
    }
    s
}

/// l(|xi_k|) on the grid, computed once per grid and shared by e^{+m l} and
/// e^{-m l}.
pub fn ell_on_grid(group: &GroupSpec) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<Vec<(GroupSpec, Arc<Vec<f64>>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    if let Some((_, v)) = cache.lock().unwrap().iter().find(|(g, _)| g == group) {
        return v.clone();
    }
    let n = group.len();
    let half: Vec<f64> = (0..=n / 2).map(|k| smoothed_log(C::new(group.xi(k).abs(), 0.0)).expect("real axis").re).collect();
    let mut full = vec![0.0; n];
    for k in 0..n {
        full[k] = if k <= n / 2 { half[k] } else { half[n - k] };
    }
    let v = Arc::new(full);
    cache.lock().unwrap().push((group.clone(), v.clone()));
    v
}

#[derive(Clone, Debug)]
pub struct TestFactorization {
    pub m: u32,
    /// Psi_m(sqrt Delta) phi.
    pub psi_phi: SampledSignal,
    /// Kernel of e^{-m l}.
    pub psi_m: Kernel,
    /// sup |phi - Psi_m phi * psi_m|.
    pub error: f64,
    pub psi_phi_certificate: DecayCertificate,
    pub psi_m_certificate: DecayCertificate,
    /// |e^{m l} phi_hat| near Nyquist relative to its max.
    pub edge_ratio: f64,
}

pub const CERT_WEIGHTS: [f64; 3] = [1.0, 2.0, 3.0];
pub const CERT_RADIUS: f64 = 8.0;

/// phi = (Psi_m(sqrt Delta) phi) * psi_m with psi_m the kernel of e^{-m l}.
pub fn strong_factorize_testfn(phi: &TestFunction, m: u32) -> Result<TestFactorization> {
    if m < 4 {
        return Err(Error::Domain(format!("m = {m}: psi_m needs m >= 4")));
    }
    let g = &phi.signal.group;
    if g.is_circle() {
        return Err(Error::Domain("test-function factorization runs on the line".into()));
    }
    let ell = ell_on_grid(g);
    let mf = m as f64;
    let up: Vec<C> = (0..g.len()).map(|k| phi.spectrum[k] * (mf * ell[k]).exp()).collect();
    let max = up.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let edge = (0..g.len()).filter(|&k| g.xi(k).abs() >= 0.9 * g.nyquist()).map(|k| up[k].norm()).fold(0.0, f64::max);
    let edge_ratio = if max > 0.0 { edge / max } else { 0.0 };
    if edge_ratio > 1e-12 {
        return Err(Error::Resolution(format!(
            "|e^(m l) phi_hat| near nyquist is {edge_ratio:.2e} of its max for {} at m = {m}",
            phi.id()
        )));
    }
    let psi_phi = SampledSignal::from_spectrum(g, &up);
    let sym = EntireSymbol::smoothed_log_exp(mf, -1.0);
    let down: Vec<C> = ell.iter().map(|l| C::new((-mf * l).exp(), 0.0)).collect();
    let psi_m = kernel_from_spectrum(&sym, g, &ShiftPolicy { enabled: false, ..ShiftPolicy::default() }, &down)?;
    // psi_m * Psi_m phi, with psi_m applied through its exact coefficients
    let rec_spec: Vec<C> = psi_phi.spectrum().iter().zip(&down).map(|(a, b)| a * b).collect();
    let rec = SampledSignal::from_spectrum(g, &rec_spec);
    let error = rec.max_abs_diff(&phi.signal);
    let psi_m_certificate = decay_certificate_kernel(&psi_m, &CERT_WEIGHTS, CERT_RADIUS);
    let bound = |n: f64| {
        line_integral_ln(n, &|z| match smoothed_log(z) {
            Ok(l) => mf * l.re + phi.spectrum_at(z).norm().ln(),
            Err(_) => f64::NAN,
        })
    };
    let psi_phi_certificate =
        decay_certificate_signal(&psi_phi, &CERT_WEIGHTS, CERT_RADIUS, &format!("Psi_{m} {}", phi.id()), &bound);
    Ok(TestFactorization { m, psi_phi, psi_m, error, psi_phi_certificate, psi_m_certificate, edge_ratio })
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityProbe {
    pub m: u32,
    pub k: u32,
    /// ln of int_{2^j}^{2^{j+1}} xi^k e^{-m l(xi)} d xi, j = -1.. (first block is [0, 1]).
    pub ln_increments: Vec<f64>,
    /// Last increment over the previous one.
    pub ratio: f64,
    /// Last increment over the running integral.
    pub relative_increment: f64,
    pub pass: bool,
}

const PROBE_BLOCKS: usize = 24;

/// Whether int_0^inf xi^k e^{-m l(xi)} d xi settles: the dyadic increments
/// must shrink geometrically and be negligible by xi = 2^24.
pub fn psi_regularity_probe(m: u32, k: u32) -> RegularityProbe {
    let g = GaussLegendre::new(20);
    let ln_f = |x: f64| k as f64 * x.ln() - m as f64 * smoothed_log(C::new(x, 0.0)).expect("real axis").re;
    let block = |a: f64, b: f64| {
        let w = (b - a) / 16.0;
        log_sum_exp((0..16).flat_map(|i| g.on(a + i as f64 * w, a + (i + 1) as f64 * w)).map(|(x, wt)| wt.ln() + ln_f(x)))
    };
    let mut ln_increments = vec![block(0.0, 1.0)];
    for j in 0..PROBE_BLOCKS {
        ln_increments.push(block(2f64.powi(j as i32), 2f64.powi(j as i32 + 1)));
    }
    let n = ln_increments.len();
    let ratio = (ln_increments[n - 1] - ln_increments[n - 2]).exp();
    let relative_increment = (ln_increments[n - 1] - log_sum_exp(ln_increments.iter().cloned())).exp();
    let pass = ratio < 0.75 && relative_increment < 1e-3;
    RegularityProbe { m, k, ln_increments, ratio, relative_increment, pass }
}

#[cfg(test)]
mod tests;
