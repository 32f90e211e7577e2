//! Contour Fourier transforms of orbit maps and the single-product
//! factorization v = (2 pi)^{-1} Pi(kappa) w for translation representations.

use super::{C, CERT_RADIUS};
use crate::certificate::DecayCertificate;
use crate::error::{Error, Result};
use crate::multiplier::{decay_certificate_kernel, kernel_of_symbol, Kernel, SampledSignal, ShiftPolicy};
use crate::quad::GaussLegendre;
use crate::representation::{analyticity_radius, pi_coeffs, AnalyticityEstimate, Band, OrbitMap, RepVector};
use crate::symbols::EntireSymbol;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Target for the analytic tail bound of the half-line integrals.
pub const TAIL_TOL: f64 = 1e-10;
/// Scalar evaluations allowed per half-line integral.
const EVAL_BUDGET: f64 = 1e9;

fn gl24() -> &'static GaussLegendre {
    static G: OnceLock<GaussLegendre> = OnceLock::new();
    G.get_or_init(|| GaussLegendre::new(24))
}

/// int over t in side * [0, inf) of gamma(t)(x) e^{-i t z} dt, with growth
/// |gamma(t)| <= C e^{c|t|} and C = |v|.
fn half_line(gamma: &OrbitMap, z: C, x: f64, c: f64, side: f64) -> Result<C> {
    let d = side * -z.im - c;
    if !(d > 0.0) {
        return Err(Error::Contour { im: z.im, c });
    }
    let cst = gamma.vector.norm();
    if cst == 0.0 {
        return Ok(C::new(0.0, 0.0));
    }
    // C e^{-d T} / d <= TAIL_TOL
    let t_max = ((cst / (d * TAIL_TOL)).ln() / d).max(1.0);
    // up to three oscillations per GL24 panel
    let width = (6.0 * PI / (z.re.abs() + 1.0)).min(2.0);
    let nodes = (t_max / width).ceil() + 2.0 * t_max.log2().max(0.0);
    let per_eval = if gamma.vector.exact.is_some() { 1.0 } else { gamma.vector.rep.group.len() as f64 };
    if 24.0 * nodes * per_eval > EVAL_BUDGET {
        return Err(Error::Truncation(format!(
            "tail bound {TAIL_TOL:e} needs |t| up to {t_max:.1} at Re z = {:.1}: {:.1e} evaluations",
            z.re,
            24.0 * nodes * per_eval
        )));
    }
    let g = gl24();
    let f = |t: f64| {
        let tt = side * t;
        gamma.eval(tt, x) * (-C::i() * tt * z).exp()
    };
    // [0, 1], then dyadic panels [2^j, 2^{j+1}] cut at t_max
    let mut s = g.composite_c(0.0, 1.0, width, f);
    let mut a = 1.0;
    while a < t_max {
        let b = (2.0 * a).min(t_max);
        s += g.composite_c(a, b, width, f);
        a = b;
    }
    Ok(s)
}

/// F_+(gamma_v)(z) at x_eval: int_{-inf}^0 gamma_v(t)(x_eval) e^{-i t z} dt, Im z > c.
pub fn contour_fourier_plus(gamma: &OrbitMap, z: C, x_eval: f64, c: f64) -> Result<C> {
    half_line(gamma, z, x_eval, c, -1.0)
}

/// F_-(gamma_v)(z) at x_eval: -int_0^inf gamma_v(t)(x_eval) e^{-i t z} dt, Im z < -c.
pub fn contour_fourier_minus(gamma: &OrbitMap, z: C, x_eval: f64, c: f64) -> Result<C> {
    Ok(-half_line(gamma, z, x_eval, c, 1.0)?)
}

/// F_+ and F_- sampled on Im z = 2c and Im z = -2c at one point x_eval.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ContourTransform {
    pub c: f64,
    pub height: f64,
    pub x_eval: f64,
    /// C in |gamma(t)| <= C e^{c|t|}.
    pub growth: f64,
    pub xi: Vec<f64>,
    #[serde(serialize_with = "ser_c")]
    pub plus: Vec<C>,
    #[serde(serialize_with = "ser_c")]
    pub minus: Vec<C>,
}

fn ser_c<S: serde::Serializer>(v: &[C], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl ContourTransform {
    pub fn sample(gamma: &OrbitMap, c: f64, x_eval: f64, xi: &[f64]) -> Result<Self> {
        let h = 2.0 * c;
        let plus = xi.iter().map(|&x| contour_fourier_plus(gamma, C::new(x, h), x_eval, c)).collect::<Result<Vec<_>>>()?;
        let minus = xi.iter().map(|&x| contour_fourier_minus(gamma, C::new(x, -h), x_eval, c)).collect::<Result<Vec<_>>>()?;
        Ok(ContourTransform { c, height: h, x_eval, growth: gamma.vector.norm(), xi: xi.to_vec(), plus, minus })
    }

    /// F(gamma_v)(xi) = F_+(xi + 2ic) - F_-(xi - 2ic).
    pub fn difference(&self) -> Vec<C> {
        self.plus.iter().zip(&self.minus).map(|(p, m)| p - m).collect()
    }
}

/// Cauchy mean-value residual of F_+ (F_-) on circles of radius c/2 centred
/// at xi + 2.5ic (xi - 2.5ic), which touch the heights 2c and 3c. Zero up to
/// quadrature error iff the half-line transforms are analytic there.
pub fn contour_independence(gamma: &OrbitMap, c: f64, x_eval: f64, xi: &[f64]) -> Result<f64> {
    const POINTS: usize = 32;
    let mut worst: f64 = 0.0;
    for &x in xi {
        for sign in [1.0, -1.0] {
            let f = |z: C| if sign > 0.0 { contour_fourier_plus(gamma, z, x_eval, c) } else { contour_fourier_minus(gamma, z, x_eval, c) };
            let centre = C::new(x, sign * 2.5 * c);
            let mut mean = C::new(0.0, 0.0);
            for j in 0..POINTS {
                mean += f(centre + C::from_polar(0.5 * c, 2.0 * PI * j as f64 / POINTS as f64))?;
            }
            mean /= POINTS as f64;
            worst = worst.max((f(centre)? - mean).norm());
        }
    }
    Ok(worst)
}

const INVERSION_XI: f64 = 40.0;

/// F^{-1}(F(gamma_v))(0) at x_eval by the contour integrals on Im t = +-2c.
/// At the origin the two contour integrands combine into F_+(xi + 2ic) -
/// F_-(xi - 2ic), which decays like xi^{-2}. |xi| > 40 is summed from the
/// common asymptotic expansion of F_+ and F_-.
pub fn inversion_at_origin(gamma: &OrbitMap, c: f64, x_eval: f64) -> Result<C> {
    let g = GaussLegendre::new(16);
    let h = 2.0 * c;
    let mut err = None;
    let body = g.composite_c(-INVERSION_XI, INVERSION_XI, 0.5, |x| {
        let p = contour_fourier_plus(gamma, C::new(x, h), x_eval, c);
        let m = contour_fourier_minus(gamma, C::new(x, -h), x_eval, c);
        match (p, m) {
            (Ok(p), Ok(m)) => p - m,
            (Err(e), _) | (_, Err(e)) => {
                err.get_or_insert(e);
                C::new(0.0, 0.0)
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    // F_+-(z) ~ sum_k i^{1-k} gamma^{(k)}(0) z^{-k-1}; odd k cancel between the two tails
    let dx = 1e-3;
    let g0 = gamma.eval(0.0, x_eval);
    let g2 = (gamma.eval(dx, x_eval) - 2.0 * g0 + gamma.eval(-dx, x_eval)) / (dx * dx);
    let a = C::new(0.0, h);
    let xm = C::new(INVERSION_XI, 0.0);
    let t0 = -2.0 * C::i() * g0 * ((xm + a) / (xm - a)).ln();
    let t2 = -C::i() * g2 * (1.0 / ((xm + a) * (xm + a)) - 1.0 / ((xm - a) * (xm - a)));
    Ok(body + t0 + t2)
}

#[derive(Clone, Debug)]
pub struct HyperFactorization {
    pub c: f64,
    pub r: f64,
    /// Kernel of e^{-g}, g(z) = (R z / 2) erf z.
    pub factor_kernel: Kernel,
    /// w = F^{-1}(e^g F(gamma_v))(0).
    pub partner: RepVector,
    /// (2 pi)^{-1} Pi(kappa) w.
    pub reconstruction: RepVector,
    pub eval_points: Vec<f64>,
    /// max |v - reconstruction| over eval_points.
    pub error: f64,
    /// The same over the whole grid.
    pub sup_error: f64,
    pub factor_certificate: DecayCertificate,
    pub contour_independence: f64,
    /// max |F^{-1}(F(gamma_v))(0) - 2 pi v| at the inversion probes.
    pub inversion_residual: f64,
    /// |e^g v_hat| on the top tenth of the resolved band over its max.
    pub growth_edge: f64,
    pub analyticity: AnalyticityEstimate,
    pub contour: ContourTransform,
}

pub const FACTOR_WEIGHTS: [f64; 2] = [1.0, 1.5];
const INDEPENDENCE_XI: [f64; 4] = [-1.5, 0.0, 0.7, 2.0];
const INDEPENDENCE_X: [f64; 2] = [0.0, 1.0];
/// Largest |e^g v_hat| on the top tenth of the kept band, relative to its max,
/// that still counts as decaying.
pub const GROWTH_TOL: f64 = 1e-6;

const INVERSION_X: [f64; 2] = [0.0, 1.5];

/// v = (2 pi)^{-1} Pi(F^{-1}(e^{-g})) F^{-1}(e^g F(gamma_v))(0) for the
/// translation representation, with F(gamma_v) taken as the boundary value
/// F_+(xi + i0) - F_-(xi - i0) = e^{i x xi} v_hat(xi) on the frequency grid.
pub fn strong_factorize_vector(v: &RepVector, c: f64, r: f64) -> Result<HyperFactorization> {
    if !(c > 0.0) || !(r > 0.0) {
        return Err(Error::Domain(format!("need c > 0 and R > 0, got c = {c}, R = {r}")));
    }
    let grp = &v.rep.group;
    let band = Band::of(&v.data);
    let sym = EntireSymbol::erf_linear(r);
    let mut partner_spec = vec![C::new(0.0, 0.0); grp.len()];
    let mut top: f64 = 0.0;
    for &k in &band.kept {
        // e^{g} = 1 / e^{-g}
        partner_spec[k] = 2.0 * PI * band.spec[k] / sym.eval(C::new(grp.xi(k), 0.0));
        top = top.max(partner_spec[k].norm());
    }
    if partner_spec.iter().any(|s| !s.is_finite()) {
        return Err(Error::Growth(format!("e^g v_hat overflows for {} at R = {r}", v.id)));
    }
    let edge = band
        .kept
        .iter()
        .filter(|&&k| grp.xi(k).abs() >= 0.9 * band.xi_max)
        .map(|&k| partner_spec[k].norm())
        .fold(0.0, f64::max);
    let growth_edge = if top > 0.0 { edge / top } else { 0.0 };
    if !band.sparse && growth_edge > GROWTH_TOL {
        return Err(Error::Growth(format!(
            "|e^g v_hat| at |xi| = {:.1} is {growth_edge:.2e} of its max: R = {r} exceeds the strip of {}",
            band.xi_max, v.id
        )));
    }
    let partner = RepVector::new(&v.rep, &format!("partner({})", v.id), SampledSignal::from_spectrum(grp, &partner_spec))?;
    let kappa = kernel_of_symbol(&sym, grp, &ShiftPolicy::default())?;
    let rec_spec: Vec<C> = pi_coeffs(&kappa, &partner_spec)?.into_iter().map(|s| s / (2.0 * PI)).collect();
    let reconstruction = RepVector::new(&v.rep, &format!("reconstruction({})", v.id), SampledSignal::from_spectrum(grp, &rec_spec))?;

    let (eval_points, idx): (Vec<f64>, Vec<usize>) = if grp.is_circle() {
        (0..17).map(|i| i * grp.len() / 17).map(|j| (grp.coord(j), j)).unzip()
    } else {
        let n = grp.len() as i64;
        (-8..=8)
            .map(|x| {
                let j = ((x as f64 / grp.h()).round() as i64).rem_euclid(n) as usize;
                (grp.coord(j), j)
            })
            .unzip()
    };
    let error = idx.iter().map(|&j| (reconstruction.data.values[j] - v.data.values[j]).norm()).fold(0.0, f64::max);
    let sup_error = reconstruction.data.max_abs_diff(&v.data);
    let factor_certificate = decay_certificate_kernel(&kappa, &FACTOR_WEIGHTS, CERT_RADIUS);

    let gamma = OrbitMap::new(v);
    let checks: Vec<Result<f64>> = std::thread::scope(|s| {
        let mut hs = Vec::new();
        for &x in &INDEPENDENCE_X {
            let gamma = &gamma;
            hs.push(s.spawn(move || contour_independence(gamma, c, x, &INDEPENDENCE_XI)));
        }
        for &x in &INVERSION_X {
            let gamma = &gamma;
            hs.push(s.spawn(move || Ok((inversion_at_origin(gamma, c, x)? - 2.0 * PI * gamma.eval(0.0, x)).norm())));
        }
        hs.into_iter().map(|h| h.join().expect("probe thread")).collect()
    });
    let mut contour_independence: f64 = 0.0;
    let mut inversion_residual: f64 = 0.0;
    for (i, r) in checks.into_iter().enumerate() {
        let r = r?;
        if i < INDEPENDENCE_X.len() {
            contour_independence = contour_independence.max(r);
        } else {
            inversion_residual = inversion_residual.max(r);
        }
    }
    let xi: Vec<f64> = (-4..=4).map(|k| k as f64).collect();
    let contour = ContourTransform::sample(&gamma, c, 0.0, &xi)?;
    Ok(HyperFactorization {
        c,
        r,
        factor_kernel: kappa,
        partner,
        reconstruction,
        eval_points,
        error,
        sup_error,
        factor_certificate,
        contour_independence,
        inversion_residual,
        growth_edge,
        analyticity: analyticity_radius(v),
        contour,
    })
}
