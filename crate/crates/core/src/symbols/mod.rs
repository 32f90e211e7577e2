//! Error-function symbols: erf, the alpha/beta pair, smoothed absolute value
//! and logarithm, and the `EntireSymbol` wrapper used by the multiplier code.

mod erf;
mod family;

pub use erf::{erf, erfc, erfcx_scaled};
pub use family::{decay_certificate_symbol, EntireSymbol, SymbolGrid, SymbolKind};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

type C = Complex64;

/// Exponents with real part beyond this are reported as overflow.
pub const EXP_LIMIT: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WedgeRegion {
    pub n: f64,
    pub theta: f64,
}

impl WedgeRegion {
    pub fn new(n: f64, theta: f64) -> Result<Self> {
        if !(n > 0.0) || !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Domain(format!("wedge needs N > 0 and theta in (0,1), got ({n}, {theta})")));
        }
        Ok(WedgeRegion { n, theta })
    }

    pub fn contains(&self, z: C) -> bool {
        z.im.abs() < self.n || z.im.abs() < self.theta * z.re.abs()
    }
}

pub(crate) fn expm1_c(a: C) -> C {
    let s = (0.5 * a.im).sin();
    C::new(a.re.exp_m1() * a.im.cos() - 2.0 * s * s, a.re.exp() * a.im.sin())
}

/// alpha_eps(z) = 2 exp(-eps z erf z).
pub fn alpha(eps: f64, z: C) -> Result<C> {
    let e = eps * z * erf(z);
    if e.re < -EXP_LIMIT {
        return Err(Error::Overflow(format!("alpha({eps}, {z}): Re(eps z erf z) = {}", e.re)));
    }
    Ok(2.0 * (-e).exp())
}

/// ln |alpha_eps(z)|, finite wherever erf is.
pub fn alpha_ln_abs(eps: f64, z: C) -> f64 {
    2f64.ln() - (eps * z * erf(z)).re
}

/// Exponents (a, b) with alpha*cosh = e^a + e^b, evaluated on Re z >= 0.
fn exponents(eps: f64, z: C) -> (C, C, C, C) {
    let w = if z.re < 0.0 { -z } else { z };
    let (e, ec) = erf::erf_erfc_right(w);
    let a = eps * w * ec;
    let b = -eps * w * (1.0 + e);
    (w, e, a, b)
}

/// beta_eps(z) = 1 - alpha_eps(z) cosh(eps z), in the cancellation-free form
/// -expm1(eps z erfc z) - exp(-eps z (1 + erf z)).
pub fn beta(eps: f64, z: C) -> Result<C> {
    let (_, _, a, b) = exponents(eps, z);
    if a.re > EXP_LIMIT || b.re > EXP_LIMIT {
        return Err(Error::Overflow(format!("beta({eps}, {z}): exponents {a}, {b}")));
    }
    Ok(-expm1_c(a) - b.exp())
}

/// Upper bound for ln|beta| that never overflows.
pub fn beta_ln_abs(eps: f64, z: C) -> f64 {
    let (_, _, a, b) = exponents(eps, z);
    if a.re <= EXP_LIMIT && b.re <= EXP_LIMIT {
        let v = (-expm1_c(a) - b.exp()).norm();
        if v > 0.0 && v.is_finite() {
            return v.ln();
        }
    }
    crate::quad::log_sum_exp([0.0, a.re, b.re])
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IdentityResidual {
    /// |alpha cosh + beta - 1|; infinite when the terms leave f64 range.
    pub absolute: f64,
    /// Residual divided by max(1, |e^a|, |e^b|) and by 1 + |a| + |b|, the
    /// conditioning of the exponentials.
    pub scaled: f64,
    /// ln of that scale.
    pub ln_scale: f64,
}

/// Residual of alpha cosh + beta = 1. For |Re z| <= 10 alpha cosh is formed
/// directly from alpha; beyond, as the exponential sum e^a + e^b.
pub fn identity_residual_detail(eps: f64, z: C) -> IdentityResidual {
    let (w, e, a, b) = exponents(eps, z);
    let m = 0f64.max(a.re).max(b.re);
    let scale = (-m).exp();
    let ac = if w.re <= 10.0 {
        // ln cosh(eps w) = eps w + ln((1 + e^{-2 eps w}) / 2)
        let lc = eps * w + (0.5 * (1.0 + (-2.0 * eps * w).exp())).ln();
        (2f64.ln() - eps * w * e + lc - m).exp()
    } else {
        (a - m).exp() + (b - m).exp()
    };
    let em1 = if a.re <= EXP_LIMIT { expm1_c(a) * scale } else { (a - m).exp() - scale };
    let beta_s = -em1 - (b - m).exp();
    let r = (ac + beta_s - scale).norm();
    let absolute = if m > EXP_LIMIT { f64::INFINITY } else { r * m.exp() };
    IdentityResidual { absolute, scaled: r / (1.0 + a.norm() + b.norm()), ln_scale: m }
}

/// |alpha_eps(z) cosh(eps z) + beta_eps(z) - 1|.
pub fn identity_residual(eps: f64, z: C) -> f64 {
    identity_residual_detail(eps, z).absolute
}

/// z erf z + e^{-z^2}/sqrt(pi): the Gaussian-smoothed |t|.
pub fn smoothed_abs(z: C) -> C {
    z * erf(z) + (-z * z).exp() / PI.sqrt()
}

/// |Im z| allowed for `smoothed_log`.
pub const SMOOTHED_LOG_STRIP: f64 = 4.0;
const LOG_WINDOW: f64 = 10.0;

fn gl20() -> &'static GaussLegendre {
    static G: OnceLock<GaussLegendre> = OnceLock::new();
    G.get_or_init(|| GaussLegendre::new(20))
}

/// l(z) = pi^{-1/2} int e^{-(z-t)^2} ln(1+|t|) dt, by Gauss-Legendre panels of
/// width <= 1 on |t - Re z| <= 10, split at the kink t = 0.
///
/// Absolute accuracy is about 1e-15 on the real line and degrades like
/// 1e-14 e^{(Im z)^2} off it.
pub fn smoothed_log(z: C) -> Result<C> {
    if !(z.im.abs() <= SMOOTHED_LOG_STRIP) {
        return Err(Error::Domain(format!("smoothed_log needs |Im z| <= {SMOOTHED_LOG_STRIP}, got {z}")));
    }
    // evenness and conjugate symmetry, made exact by folding
    let w = C::new(z.re.abs(), z.im.abs());
    let v = smoothed_log_q1(w);
    Ok(if (z.re < 0.0) != (z.im < 0.0) { v.conj() } else { v })
}

fn smoothed_log_q1(z: C) -> C {
    let g = gl20();
    let lo = z.re - LOG_WINDOW;
    let hi = z.re + LOG_WINDOW;
    let f = |t: f64| {
        let d = z - t;
        (-d * d).exp() * t.abs().ln_1p()
    };
    let s = if lo < 0.0 && hi > 0.0 {
        g.composite_c(lo, 0.0, 1.0, f) + g.composite_c(0.0, hi, 1.0, f)
    } else {
        g.composite_c(lo, hi, 1.0, f)
    };
    s / PI.sqrt()
}
