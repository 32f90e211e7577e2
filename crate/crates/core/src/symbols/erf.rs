//! Complex error function.
//!
//! First-quadrant evaluation, mapped to the other quadrants by oddness and
//! conjugate symmetry. Near the origin the Maclaurin series is summed in
//! double-double; elsewhere erfcx comes from the Laplace continued fraction.

use crate::dd::{Cdd, Dd, TWO_OVER_SQRT_PI};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;

/// Series region: |Re z| at most this (and |z|^2 <= SERIES_MAX_ABS2).
const SERIES_MAX_RE: f64 = 3.87;
const SERIES_MAX_ABS2: f64 = 600.0;

fn in_series_region(z: C) -> bool {
    z.re <= SERIES_MAX_RE && z.norm_sqr() <= SERIES_MAX_ABS2
}

/// Maclaurin sum of erf(z) in double-double.
fn erf_series(z: C) -> Cdd {
    let zd = Cdd::from_c64(z);
    let mz2 = zd.mul(zd).mul_f64(-1.0);
    let mut p = zd;
    let mut sum = zd;
    let a2 = z.norm_sqr();
    let mut n = 1usize;
    loop {
        p = p.mul(mz2).div_f64(n as f64);
        let t = p.div_f64((2 * n + 1) as f64);
        sum = sum.add(t);
        if n as f64 > a2 && t.abs_approx() <= 1e-34 * sum.abs_approx().max(1e-300) {
            break;
        }
        n += 1;
        if n > 20_000 {
            break;
        }
    }
    let k = Cdd { re: TWO_OVER_SQRT_PI, im: Dd::ZERO };
    sum.mul(k)
}

/// e^{z^2} erfc(z) by modified Lentz on the Laplace continued fraction, Re z > 0.
fn erfcx_cf(z: C) -> C {
    let tiny = 1e-300;
    let mut f = z;
    if f.norm() == 0.0 {
        f = C::new(tiny, 0.0);
    }
    let mut cc = f;
    let mut d = C::new(0.0, 0.0);
    for k in 1..20_000 {
        let a = 0.5 * k as f64;
        d = z + d * a;
        if d.norm() == 0.0 {
            d = C::new(tiny, 0.0);
        }
        cc = z + a / cc;
        if cc.norm() == 0.0 {
            cc = C::new(tiny, 0.0);
        }
        d = d.inv();
        let delta = cc * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    1.0 / (PI.sqrt() * f)
}

/// (erf z, erfc z) for Re z >= 0, Im z >= 0.
fn erf_erfc_q1(z: C) -> (C, C) {
    if in_series_region(z) {
        let e = erf_series(z);
        let one = Cdd { re: Dd::new(1.0), im: Dd::ZERO };
        (e.to_c64(), one.sub(e).to_c64())
    } else {
        let ec = (-z * z).exp() * erfcx_cf(z);
        (1.0 - ec, ec)
    }
}

fn fold(z: C) -> (C, bool, bool) {
    (C::new(z.re.abs(), z.im.abs()), z.re < 0.0, z.im < 0.0)
}

/// Odd entire error function, erf(x) -> 1 as x -> +inf.
pub fn erf(z: C) -> C {
    if z.re == 0.0 && z.im == 0.0 {
        return z;
    }
    let (q, neg_re, neg_im) = fold(z);
    let (e, _) = erf_erfc_q1(q);
    // erf(conj z) = conj erf(z), erf(-z) = -erf(z)
    let e = if neg_re != neg_im { e.conj() } else { e };
    if neg_re {
        -e
    } else {
        e
    }
}

/// Complementary error function 1 - erf(z), accurate where it is small.
pub fn erfc(z: C) -> C {
    if z.re >= 0.0 {
        erf_erfc_right(z).1
    } else {
        2.0 - erf_erfc_right(-z).1
    }
}

/// Both erf and erfc from one evaluation, for Re z >= 0.
pub(crate) fn erf_erfc_right(z: C) -> (C, C) {
    debug_assert!(z.re >= 0.0);
    let q = C::new(z.re, z.im.abs());
    let (e, ec) = erf_erfc_q1(q);
    if z.im < 0.0 {
        (e.conj(), ec.conj())
    } else {
        (e, ec)
    }
}

/// Scaled complementary error function e^{z^2}(1 - erf z), Re z >= 0.
pub fn erfcx_scaled(z: C) -> Result<C> {
    if !(z.re >= 0.0) {
        return Err(Error::Domain(format!("erfcx_scaled needs Re z >= 0, got {z}")));
    }
    let q = C::new(z.re, z.im.abs());
    let v = if in_series_region(q) {
        let (_, ec) = erf_erfc_q1(q);
        (q * q).exp() * ec
    } else {
        erfcx_cf(q)
    };
    Ok(if z.im < 0.0 { v.conj() } else { v })
}
