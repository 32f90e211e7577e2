//! Translation on the line and rotation on the circle as Banach
//! representations on sup-normed grid functions, and the factorization of
//! analytic vectors through alpha/beta kernels.

mod series;

pub use series::{
    cosh_series_apply, cutoff_convergence_probe, delta_analytic_check, derivative_growth_probe, factorize,
    factorize_with, CoshSeries, CutoffReport, CutoffRow, DeltaAnalyticReport, Factorization, GrowthFit, SeriesVerdict,
    COSH_J_MAX,
};

use crate::error::{Error, Result};
use crate::multiplier::{GroupSpec, Kernel, SampledSignal};
use crate::quad::log_sum_exp;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::sync::Arc;

type C = Complex64;

pub type ExactFn = Arc<dyn Fn(f64) -> C + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    BoundedContinuousLine,
    ContinuousCircle,
}

/// A representation with ||pi(g)|| <= C e^{c d(g)}; translations are
/// isometric, so (c, C) = (0, 1).
#[derive(Clone, Debug)]
pub struct BanachRepSpec {
    pub group: GroupSpec,
    pub space: Space,
    pub weight: (f64, f64),
}

impl BanachRepSpec {
    pub fn translation(group: &GroupSpec) -> Self {
        let space = if group.is_circle() { Space::ContinuousCircle } else { Space::BoundedContinuousLine };
        BanachRepSpec { group: group.clone(), space, weight: (0.0, 1.0) }
    }

    /// Same space with an artificial weight, for exercising the weighted bounds.
    pub fn with_weight(mut self, c: f64, big_c: f64) -> Self {
        self.weight = (c, big_c);
        self
    }

    pub fn weight_at(&self, d: f64) -> f64 {
        self.weight.1 * (self.weight.0 * d).exp()
    }
}

/// Named vectors with closed forms.
#[derive(Clone, Debug, PartialEq)]
pub enum VectorKind {
    /// e^{ikx}; on the line k counts periods of the window.
    Mode { k: i64 },
    /// e^{-a (x - s)^2}
    Gaussian { a: f64, shift: f64 },
    /// 1/(1 + ((x - s)/b)^2), periodized over the line window.
    Lorentzian { b: f64, shift: f64 },
    /// |x| e^{-x^2}: continuous but not analytic.
    AbsGaussian,
    Constant,
    Zero,
}

impl VectorKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "lorentzian" => VectorKind::Lorentzian { b: 1.0, shift: 0.0 },
            "gaussian" => VectorKind::Gaussian { a: 1.0, shift: 0.0 },
            "abs_gaussian" => VectorKind::AbsGaussian,
            "constant" => VectorKind::Constant,
            "zero" => VectorKind::Zero,
            _ => match s.strip_prefix("mode") {
                Some(k) => VectorKind::Mode { k: k.parse().map_err(|_| Error::Config(format!("bad mode vector {s:?}")))? },
                None => return Err(Error::Config(format!("unknown vector {s:?}"))),
            },
        })
    }

    pub fn id(&self) -> String {
        match self {
            VectorKind::Mode { k } => format!("mode{k}"),
            VectorKind::Gaussian { a, shift } => format!("gaussian(a={a},s={shift})"),
            VectorKind::Lorentzian { b, shift } => format!("lorentzian(b={b},s={shift})"),
            VectorKind::AbsGaussian => "abs_gaussian".into(),
            VectorKind::Constant => "constant".into(),
            VectorKind::Zero => "zero".into(),
        }
    }
}

#[derive(Clone)]
pub struct RepVector {
    pub rep: BanachRepSpec,
    pub id: String,
    pub data: SampledSignal,
    /// Strip radius of the orbit map, when known or estimated.
    pub analyticity: Option<f64>,
    /// Closed form on the whole line. For a periodization this is the
    /// unperiodized function.
    pub exact: Option<ExactFn>,
}

impl std::fmt::Debug for RepVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RepVector({}, {:?})", self.id, self.rep.group)
    }
}

impl RepVector {
    pub fn new(rep: &BanachRepSpec, id: &str, data: SampledSignal) -> Result<Self> {
        if data.group != rep.group {
            return Err(Error::GridMismatch(format!("vector on {:?}, representation on {:?}", data.group, rep.group)));
        }
        if !data.values.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("vector {id} has non-finite samples")));
        }
        let analyticity = data.analyticity;
        Ok(RepVector { rep: rep.clone(), id: id.to_string(), data, analyticity, exact: None })
    }

    pub fn of_kind(rep: &BanachRepSpec, kind: &VectorKind) -> Result<Self> {
        let g = &rep.group;
        let t = g.half_period();
        let (vals, r, exact): (SampledSignal, Option<f64>, Option<ExactFn>) = match *kind {
            VectorKind::Mode { k } => {
                let w = k as f64 * PI / t;
                let ex: ExactFn = Arc::new(move |x| C::from_polar(1.0, w * x));
                (SampledSignal::from_cfn(g, |x| C::from_polar(1.0, w * x)), Some(f64::INFINITY), Some(ex))
            }
            VectorKind::Gaussian { a, shift } => {
                if !(a > 0.0) {
                    return Err(Error::Domain(format!("gaussian needs a > 0, got {a}")));
                }
                let f = move |x: f64| (-a * (x - shift) * (x - shift)).exp();
                let ex: ExactFn = Arc::new(move |x| C::new(f(x), 0.0));
                (SampledSignal::from_fn(g, f), Some(f64::INFINITY), Some(ex))
            }
            VectorKind::Lorentzian { b, shift } => {
                if !(b > 0.0) {
                    return Err(Error::Domain(format!("lorentzian needs b > 0, got {b}")));
                }
                // sum over periods 2T in closed form
                let q = PI * b / t;
                let s = move |x: f64| PI * b / (2.0 * t) * q.sinh() / (q.cosh() - (PI * (x - shift) / t).cos());
                let ex: ExactFn = Arc::new(move |x| {
                    let u = (x - shift) / b;
                    C::new(1.0 / (1.0 + u * u), 0.0)
                });
                (SampledSignal::from_fn(g, s), Some(b), Some(ex))
            }
            VectorKind::AbsGaussian => {
                let f = |x: f64| x.abs() * (-x * x).exp();
                let ex: ExactFn = Arc::new(move |x| C::new(f(x), 0.0));
                (SampledSignal::from_fn(g, f), Some(0.0), Some(ex))
            }
            VectorKind::Constant => {
                let ex: ExactFn = Arc::new(|_| C::new(1.0, 0.0));
                (SampledSignal::from_fn(g, |_| 1.0), Some(f64::INFINITY), Some(ex))
            }
            VectorKind::Zero => {
                let ex: ExactFn = Arc::new(|_| C::new(0.0, 0.0));
                (SampledSignal::zeros(g), Some(f64::INFINITY), Some(ex))
            }
        };
        let mut v = RepVector::new(rep, &kind.id(), vals.with_analyticity(r))?;
        v.exact = exact;
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        self.data.sup_norm()
    }

    fn with_data(&self, data: SampledSignal, id: String) -> RepVector {
        RepVector { rep: self.rep.clone(), id, analyticity: data.analyticity, data, exact: None }
    }

    /// pi(g) v = v(. + g). Grid shifts move samples exactly; other shifts use
    /// band-limited interpolation.
    pub fn translate(&self, g: f64) -> RepVector {
        let grid = &self.rep.group;
        let steps = g / grid.h();
        let data = if (steps - steps.round()).abs() < 1e-12 {
            let n = grid.len() as i64;
            let s = (steps.round() as i64).rem_euclid(n) as usize;
            let mut vals = self.data.values.clone();
            vals.rotate_left(s);
            SampledSignal { group: grid.clone(), values: vals, analyticity: self.data.analyticity }
        } else {
            self.data.translate(g)
        };
        let mut out = self.with_data(data, format!("pi({g}){}", self.id));
        if let Some(e) = &self.exact {
            let e = e.clone();
            out.exact = Some(Arc::new(move |x| e(x + g)));
        }
        out
    }

    pub fn describe(&self) -> Value {
        json!({ "id": self.id, "grid": self.rep.group.describe(), "analyticity": self.analyticity })
    }
}

/// gamma_v(g) = pi(g) v.
#[derive(Clone, Debug)]
pub struct OrbitMap {
    pub vector: RepVector,
}

impl OrbitMap {
    pub fn new(v: &RepVector) -> Self {
        OrbitMap { vector: v.clone() }
    }

    pub fn at(&self, g: f64) -> RepVector {
        if g == 0.0 {
            return self.vector.clone();
        }
        self.vector.translate(g)
    }

    /// Scalar value gamma_v(g)(x) = v(x + g), from the exact function when
    /// one is attached and by interpolation otherwise.
    pub fn eval(&self, g: f64, x: f64) -> C {
        match &self.vector.exact {
            Some(f) => f(x + g),
            None => self.vector.data.eval_at(x + g),
        }
    }

    /// max |gamma(g + h) - pi(g) gamma(h)|.
    pub fn cocycle_defect(&self, g: f64, h: f64) -> f64 {
        self.at(g + h).data.max_abs_diff(&self.at(h).translate(g).data)
    }
}

/// Pi(phi) v(x) = int phi(g) v(x + g) dg, by FFT correlation.
pub fn pi_apply(phi: &SampledSignal, v: &RepVector) -> Result<RepVector> {
    let g = &v.rep.group;
    if phi.group != *g {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", phi.group, g)));
    }
    check_decay(phi)?;
    Ok(pi_spectral(&phi.spectrum(), v))
}

fn check_decay(phi: &SampledSignal) -> Result<()> {
    let g = &phi.group;
    if !g.is_circle() {
        let sup = phi.sup_norm();
        let edge = (0..g.len()).filter(|&j| g.dist(j) >= 0.9 * g.half_period()).map(|j| phi.values[j].norm()).fold(0.0, f64::max);
        if sup > 0.0 && edge > 1e-12 * sup {
            return Err(Error::Decay(format!("|phi| at the window edge is {:.2e} of its sup", edge / sup)));
        }
    }
    Ok(())
}

/// Pi(kappa) v, using the kernel's exact coefficients when it carries them.
/// Re-transforming a circle kernel costs eps_mach relative to its largest
/// coefficient on every mode.
pub fn pi_apply_kernel(k: &Kernel, v: &RepVector) -> Result<RepVector> {
    match &k.spectrum {
        Some(s) if k.signal.group == v.rep.group => Ok(pi_spectral(s, v)),
        _ => pi_apply(&k.signal, v),
    }
}

/// Coefficients of Pi(kappa) applied to a vector given by its coefficients.
pub(crate) fn pi_coeffs(k: &Kernel, vs: &[C]) -> Result<Vec<C>> {
    let g = &k.signal.group;
    let ps = match &k.spectrum {
        Some(s) => s.clone(),
        None => {
            check_decay(&k.signal)?;
            k.signal.spectrum()
        }
    };
    Ok((0..g.len()).map(|j| ps[g.inverse_index(j)] * vs[j]).collect())
}

fn pi_spectral(ps: &[C], v: &RepVector) -> RepVector {
    let g = &v.rep.group;
    let vs = v.data.spectrum();
    let n = g.len();
    let out: Vec<C> = (0..n).map(|k| ps[g.inverse_index(k)] * vs[k]).collect();
    let data = SampledSignal::from_spectrum(g, &out);
    v.with_data(data, format!("Pi(phi){}", v.id))
}

/// ||v|| * C int |phi| e^{c d}: the continuity bound for Pi(phi) v.
pub fn pi_bound(phi: &SampledSignal, v: &RepVector) -> f64 {
    let g = &phi.group;
    let s: f64 = (0..g.len()).map(|j| phi.values[j].norm() * v.rep.weight_at(g.dist(j))).sum();
    v.norm() * s * g.h()
}

/// Largest |pi(g) v| / |v| over the probes.
pub fn operator_norm_probe(shifts: &[f64], probes: &[RepVector]) -> f64 {
    let mut m: f64 = 0.0;
    for v in probes {
        let n0 = v.norm();
        if n0 == 0.0 {
            continue;
        }
        for &s in shifts {
            m = m.max(v.translate(s).norm() / n0);
        }
    }
    m
}

/// Spectrum of a vector split into signal and rounding noise.
pub(crate) struct Band {
    pub spec: Vec<C>,
    /// Modes above the noise floor.
    pub kept: Vec<usize>,
    /// Largest |xi| among kept modes.
    pub xi_max: f64,
    /// At most SPARSE_MODES distinct |xi|: a finite mode sum.
    pub sparse: bool,
    /// 1 / (n h), the inverse transform weight.
    pub inv_weight: f64,
}

pub(crate) const SPARSE_MODES: usize = 16;
/// Noise floor: this multiple of eps times the largest spectral magnitude.
pub(crate) const FLOOR_FACTOR: f64 = 64.0;
/// Moments whose top-band share exceeds this are not trusted.
pub(crate) const RELIABLE_SHARE: f64 = 1e-3;

impl Band {
    pub fn of(v: &SampledSignal) -> Band {
        let g = &v.group;
        let spec = v.spectrum();
        let vmax = spec.iter().map(|s| s.norm()).fold(0.0, f64::max);
        let floor = FLOOR_FACTOR * f64::EPSILON * vmax;
        let kept: Vec<usize> = (0..g.len()).filter(|&k| vmax > 0.0 && spec[k].norm() > floor).collect();
        let mut d: Vec<f64> = kept.iter().map(|&k| g.xi(k).abs()).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        let xi_max = d.last().copied().unwrap_or(0.0);
        Band { spec, kept, xi_max, sparse: d.len() <= SPARSE_MODES, inv_weight: 1.0 / (g.len() as f64 * g.h()) }
    }

    /// ln of (1/(n h)) sum_kept |xi|^p |v_hat|, an upper bound for the sup norm
    /// of the p-th derivative, and the share of that sum from |xi| > 0.8 xi_max.
    pub fn moment_ln(&self, g: &GroupSpec, p: f64) -> (f64, f64) {
        let mut all = Vec::with_capacity(self.kept.len());
        let mut top = Vec::new();
        for &k in &self.kept {
            let x = g.xi(k).abs();
            if x == 0.0 && p > 0.0 {
                continue;
            }
            let l = if p > 0.0 { p * x.ln() } else { 0.0 } + self.spec[k].norm().ln();
            all.push(l);
            if x > 0.8 * self.xi_max {
                top.push(l);
            }
        }
        let la = log_sum_exp(all.iter().cloned());
        let share = if la == f64::NEG_INFINITY { 0.0 } else { (log_sum_exp(top) - la).exp() };
        (la + self.inv_weight.ln(), if self.sparse { 0.0 } else { share })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticityEstimate {
    pub radius: f64,
    /// The decay looked superexponential and the radius is the ladder cap.
    pub capped: bool,
    /// Mean exponential decay rate of |v_hat| on [xi_max/2, xi_max].
    pub rate_outer: f64,
    /// Same on [xi_max/4, xi_max/2].
    pub rate_inner: f64,
}

/// Ladder of candidate radii 2^{i/4}/16, from 1/16 to 4.
pub fn analyticity_ladder() -> Vec<f64> {
    (0..=24).map(|i| 2f64.powf(i as f64 / 4.0) / 16.0).collect()
}

/// Strip radius from the exponential decay rate of the spectrum over the
/// resolved band, rounded down to the ladder.
pub fn analyticity_radius(v: &RepVector) -> AnalyticityEstimate {
    let g = &v.rep.group;
    let b = Band::of(&v.data);
    let ladder = analyticity_ladder();
    let cap = *ladder.last().unwrap();
    if b.sparse {
        return AnalyticityEstimate { radius: cap, capped: true, rate_outer: f64::INFINITY, rate_inner: f64::INFINITY };
    }
    // largest |v_hat| in a small window around |xi| = t
    let peak = |t: f64| {
        let w = 0.02 * b.xi_max;
        b.kept
            .iter()
            .filter(|&&k| (g.xi(k).abs() - t).abs() <= w)
            .map(|&k| b.spec[k].norm())
            .fold(0.0, f64::max)
            .ln()
    };
    let x = b.xi_max;
    let rate = |a: f64, c: f64| (peak(a) - peak(c)) / (c - a);
    let rate_outer = rate(0.5 * x, 0.98 * x);
    let rate_inner = rate(0.25 * x, 0.5 * x);
    let superexp = rate_inner > 0.0 && rate_outer >= 1.5 * rate_inner;
    let (radius, capped) = if superexp {
        (cap, true)
    } else {
        (ladder.iter().copied().filter(|&r| r <= rate_outer * (1.0 + 1e-9)).last().unwrap_or(0.0), false)
    };
    AnalyticityEstimate { radius: if radius >= cap { cap } else { radius }, capped: capped || radius >= cap, rate_outer, rate_inner }
}

#[cfg(test)]
mod tests;
