//! Functional calculus f(sqrt(Delta)) on the line and the circle.
//!
//! Both groups share one discretization: `n` samples with spacing `h`, stored
//! in FFT order so that index 0 is the identity element. The line is the
//! periodic window [-L, L) and the circle is [0, 2pi) with frequencies at
//! the integers. Spectra use the convention phi_hat_k = h * DFT(phi)_k, so a
//! sampled symbol f(|xi_k|) turns into its kernel by `from_spectrum`.

mod kernel;
mod ops;

pub use kernel::{
    contour_bound_ln, line_integral_ln, decay_certificate_kernel, decay_certificate_signal, kernel_from_spectrum, kernel_of_symbol, Kernel,
    ShiftBand, ShiftPolicy,
};
pub use ops::{
    apply_multiplier, apply_multiplier_detail, apply_spectrum, chi_from_distance, convolve, cutoff_chi, heat_kernel, regularized_distance,
    wave_crosscheck, DistanceReport, MultiplierOpts, MultiplierOutput, WaveResidual,
};

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GroupKind {
    RealLine { l: f64, n: usize },
    Circle { m: usize },
}

/// Default line grid.
pub const DEFAULT_L: f64 = 64.0;
pub const DEFAULT_N: usize = 1 << 16;
/// Default number of circle modes.
pub const DEFAULT_M: usize = 256;

#[derive(Clone)]
pub struct GroupSpec {
    pub kind: GroupKind,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)
    }
}

impl PartialEq for GroupSpec {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind
    }
}

impl GroupSpec {
    fn with_len(kind: GroupKind, n: usize) -> Self {
        let mut p = FftPlanner::new();
        GroupSpec { kind, fwd: p.plan_fft_forward(n), inv: p.plan_fft_inverse(n) }
    }

    pub fn real_line(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || n < 8 || !n.is_power_of_two() {
            return Err(Error::Config(format!("line grid needs L > 0 and N a power of two >= 8, got L={l}, N={n}")));
        }
        Ok(Self::with_len(GroupKind::RealLine { l, n }, n))
    }

    pub fn circle(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("circle needs M >= 2 modes, got {m}")));
        }
        Ok(Self::with_len(GroupKind::Circle { m }, 2 * m))
    }

    pub fn default_line() -> Self {
        Self::real_line(DEFAULT_L, DEFAULT_N).unwrap()
    }

    pub fn is_circle(&self) -> bool {
        matches!(self.kind, GroupKind::Circle { .. })
    }

    pub fn len(&self) -> usize {
        match self.kind {
            GroupKind::RealLine { n, .. } => n,
            GroupKind::Circle { m } => 2 * m,
        }
    }

    /// Half-period: L on the line, pi on the circle.
    pub fn half_period(&self) -> f64 {
        match self.kind {
            GroupKind::RealLine { l, .. } => l,
            GroupKind::Circle { .. } => PI,
        }
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_period() / self.len() as f64
    }

    /// Signed index in FFT order: k for k < n/2, k - n otherwise.
    pub fn signed(&self, k: usize) -> i64 {
        let n = self.len();
        if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    /// Frequency of spectral index k (integers on the circle).
    pub fn xi(&self, k: usize) -> f64 {
        self.signed(k) as f64 * PI / self.half_period()
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.h()
    }

    /// Coordinate of sample j: in [-L, L) on the line, [0, 2pi) on the circle.
    pub fn coord(&self, j: usize) -> f64 {
        match self.kind {
            GroupKind::RealLine { .. } => self.signed(j) as f64 * self.h(),
            GroupKind::Circle { .. } => j as f64 * self.h(),
        }
    }

    /// d(g, 1): |x| on the line, geodesic distance on the circle.
    pub fn dist(&self, j: usize) -> f64 {
        (self.signed(j) as f64 * self.h()).abs()
    }

    /// Index of the inverse element.
    pub fn inverse_index(&self, j: usize) -> usize {
        (self.len() - j) % self.len()
    }

    /// Sample indices sorted by coordinate.
    pub fn sorted_indices(&self) -> Vec<usize> {
        let n = self.len();
        match self.kind {
            GroupKind::RealLine { .. } => (0..n).map(|i| (i + n / 2) % n).collect(),
            GroupKind::Circle { .. } => (0..n).collect(),
        }
    }

    pub fn describe(&self) -> Value {
        match self.kind {
            GroupKind::RealLine { l, n } => json!({ "group": "real_line", "L": l, "N": n, "h": self.h() }),
            GroupKind::Circle { m } => json!({ "group": "circle", "M": m, "samples": 2 * m }),
        }
    }

    /// Unnormalized forward DFT.
    pub fn dft(&self, v: &[C]) -> Vec<C> {
        let mut b = v.to_vec();
        self.fwd.process(&mut b);
        b
    }

    /// Unnormalized inverse DFT.
    pub fn idft(&self, v: &[C]) -> Vec<C> {
        let mut b = v.to_vec();
        self.inv.process(&mut b);
        b
    }
}

/// Samples of a function on a group grid, in FFT order.
#[derive(Clone, Debug)]
pub struct SampledSignal {
    pub group: GroupSpec,
    pub values: Vec<C>,
    /// Strip radius estimate, when known.
    pub analyticity: Option<f64>,
}

impl SampledSignal {
    pub fn new(group: &GroupSpec, values: Vec<C>) -> Result<Self> {
        if values.len() != group.len() {
            return Err(Error::GridMismatch(format!("{} values for a grid of {}", values.len(), group.len())));
        }
        Ok(SampledSignal { group: group.clone(), values, analyticity: None })
    }

    pub fn zeros(group: &GroupSpec) -> Self {
        SampledSignal { group: group.clone(), values: vec![C::new(0.0, 0.0); group.len()], analyticity: None }
    }

    /// Samples of a real function of the coordinate.
    pub fn from_fn<F: Fn(f64) -> f64>(group: &GroupSpec, f: F) -> Self {
        let values = (0..group.len()).map(|j| C::new(f(group.coord(j)), 0.0)).collect();
        SampledSignal { group: group.clone(), values, analyticity: None }
    }

    pub fn from_cfn<F: Fn(f64) -> C>(group: &GroupSpec, f: F) -> Self {
        let values = (0..group.len()).map(|j| f(group.coord(j))).collect();
        SampledSignal { group: group.clone(), values, analyticity: None }
    }

    /// Inverse of `spectrum`.
    pub fn from_spectrum(group: &GroupSpec, spec: &[C]) -> Self {
        let s = 1.0 / (group.len() as f64 * group.h());
        let values = group.idft(spec).into_iter().map(|v| v * s).collect();
        SampledSignal { group: group.clone(), values, analyticity: None }
    }

    /// phi_hat_k = h * DFT(phi)_k, approximating the integral transform.
    pub fn spectrum(&self) -> Vec<C> {
        let h = self.group.h();
        self.group.dft(&self.values).into_iter().map(|v| v * h).collect()
    }

    pub fn with_analyticity(mut self, r: Option<f64>) -> Self {
        self.analyticity = r;
        self
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, o: &SampledSignal) -> f64 {
        self.values.iter().zip(&o.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Max |v| over samples with d(g) <= r.
    pub fn sup_within(&self, r: f64) -> f64 {
        (0..self.values.len())
            .filter(|&j| self.group.dist(j) <= r)
            .map(|j| self.values[j].norm())
            .fold(0.0, f64::max)
    }

    /// Haar integral by the trapezoid rule.
    pub fn integral(&self) -> C {
        self.values.iter().sum::<C>() * self.group.h()
    }

    pub fn add(&self, o: &SampledSignal) -> SampledSignal {
        let values = self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect();
        SampledSignal { group: self.group.clone(), values, analyticity: None }
    }

    pub fn sub(&self, o: &SampledSignal) -> SampledSignal {
        let values = self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect();
        SampledSignal { group: self.group.clone(), values, analyticity: None }
    }

    pub fn scale(&self, s: C) -> SampledSignal {
        SampledSignal { group: self.group.clone(), values: self.values.iter().map(|v| v * s).collect(), analyticity: self.analyticity }
    }

    pub fn mul(&self, o: &SampledSignal) -> SampledSignal {
        let values = self.values.iter().zip(&o.values).map(|(a, b)| a * b).collect();
        SampledSignal { group: self.group.clone(), values, analyticity: None }
    }

    /// max |v(-x) - v(x)| and max |Im v|.
    pub fn evenness_defect(&self) -> (f64, f64) {
        let n = self.values.len();
        let mut odd: f64 = 0.0;
        let mut im: f64 = 0.0;
        for j in 0..n {
            odd = odd.max((self.values[j] - self.values[self.group.inverse_index(j)]).norm());
            im = im.max(self.values[j].im.abs());
        }
        (odd, im)
    }

    /// Band-limited interpolation at an arbitrary coordinate.
    pub fn eval_at(&self, x: f64) -> C {
        let spec = self.spectrum();
        eval_spectrum_at(&self.group, &spec, x)
    }

    /// Exact translate v(. + g) for the band-limited interpolant.
    pub fn translate(&self, g: f64) -> SampledSignal {
        let spec = self.spectrum();
        let shifted: Vec<C> =
            spec.iter().enumerate().map(|(k, s)| s * C::from_polar(1.0, self.group.xi(k) * g)).collect();
        let mut out = SampledSignal::from_spectrum(&self.group, &shifted);
        out.analyticity = self.analyticity;
        out
    }

    /// (coordinate, value) pairs sorted by coordinate.
    pub fn sorted_pairs(&self) -> Vec<(f64, C)> {
        self.group.sorted_indices().into_iter().map(|j| (self.group.coord(j), self.values[j])).collect()
    }
}

/// Evaluate (1/(n h)) sum_k spec_k e^{i xi_k x}, treating the Nyquist mode
/// as a cosine so real even data stays real.
pub fn eval_spectrum_at(group: &GroupSpec, spec: &[C], x: f64) -> C {
    let n = group.len();
    let mut s = C::new(0.0, 0.0);
    for (k, sk) in spec.iter().enumerate() {
        if k == n / 2 {
            s += sk * (group.nyquist() * x).cos();
        } else {
            s += sk * C::from_polar(1.0, group.xi(k) * x);
        }
    }
    s / (n as f64 * group.h())
}

#[cfg(test)]
mod tests;
