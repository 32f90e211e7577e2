use super::{kernel_of_symbol, GroupSpec, Kernel, SampledSignal, ShiftPolicy};
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::symbols::EntireSymbol;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

type C = Complex64;

#[derive(Clone, Copy, Debug)]
pub struct MultiplierOpts {
    /// |v_hat| on the top tenth of the band, relative to max |v_hat|.
    pub band_tol: f64,
    /// |f v_hat| at the edge of the kept band, relative to its max.
    pub unbounded_tol: f64,
    /// Growing symbols: modes with |v_hat| below this multiple of eps * max
    /// are treated as zero.
    pub floor_factor: f64,
    /// Inputs with at most this many distinct |xi| are finite mode sums and
    /// skip the decay test.
    pub sparse_modes: usize,
}

impl Default for MultiplierOpts {
    fn default() -> Self {
        MultiplierOpts { band_tol: 1e-12, unbounded_tol: 1e-8, floor_factor: 64.0, sparse_modes: 16 }
    }
}

#[derive(Clone, Debug)]
pub struct MultiplierOutput {
    pub signal: SampledSignal,
    /// Modes zeroed as rounding noise (growing symbols only).
    pub truncated_modes: usize,
    pub noise_floor: f64,
}

/// f(sqrt(Delta)) v by the spectral definition.
pub fn apply_multiplier(f: &EntireSymbol, v: &SampledSignal) -> Result<SampledSignal> {
    apply_multiplier_detail(f, v, &MultiplierOpts::default()).map(|o| o.signal)
}

pub fn apply_multiplier_detail(f: &EntireSymbol, v: &SampledSignal, opts: &MultiplierOpts) -> Result<MultiplierOutput> {
    let g = &v.group;
    let n = g.len();
    let spec = v.spectrum();
    let vmax = spec.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if vmax == 0.0 {
        return Ok(MultiplierOutput { signal: SampledSignal::zeros(g), truncated_modes: 0, noise_floor: 0.0 });
    }
    let top = 0.9 * g.nyquist();
    let edge = (0..n).filter(|&k| g.xi(k).abs() >= top).map(|k| spec[k].norm()).fold(0.0, f64::max);
    if edge > opts.band_tol * vmax {
        return Err(Error::Resolution(format!("|v_hat| near nyquist is {:.2e} of its max", edge / vmax)));
    }
    let fv: Vec<C> = (0..n).map(|k| f.eval(C::new(g.xi(k).abs(), 0.0))).collect();
    if f.decaying {
        let out: Vec<C> = spec.iter().zip(&fv).map(|(a, b)| a * b).collect();
        return Ok(MultiplierOutput { signal: SampledSignal::from_spectrum(g, &out), truncated_modes: 0, noise_floor: 0.0 });
    }
    let floor = opts.floor_factor * f64::EPSILON * vmax;
    let mut out = vec![C::new(0.0, 0.0); n];
    let mut truncated = 0;
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for k in 0..n {
        if spec[k].norm() <= floor {
            if spec[k].norm() > 0.0 {
                truncated += 1;
            }
            continue;
        }
        let p = spec[k] * fv[k];
        if !p.is_finite() {
            return Err(Error::Unbounded(format!("f(|xi|) v_hat overflows at xi = {}", g.xi(k))));
        }
        out[k] = p;
        kept.push((g.xi(k).abs(), p.norm()));
    }
    let mut distinct: Vec<f64> = kept.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() > opts.sparse_modes {
        let xmax = *distinct.last().unwrap();
        let pmax = kept.iter().map(|p| p.1).fold(0.0, f64::max);
        let at_edge = kept.iter().filter(|p| p.0 >= 0.9 * xmax).map(|p| p.1).fold(0.0, f64::max);
        if at_edge > opts.unbounded_tol * pmax {
            return Err(Error::Unbounded(format!(
                "|f v_hat| at the edge |xi| = {xmax:.3} of the resolved band is {:.2e} of its max",
                at_edge / pmax
            )));
        }
    }
    Ok(MultiplierOutput { signal: SampledSignal::from_spectrum(g, &out), truncated_modes: truncated, noise_floor: floor })
}

/// Multiply the spectrum of v by given per-mode values.
pub fn apply_spectrum(mult: &[C], v: &SampledSignal) -> Result<SampledSignal> {
    if mult.len() != v.values.len() {
        return Err(Error::GridMismatch(format!("{} multipliers for {} samples", mult.len(), v.values.len())));
    }
    let s: Vec<C> = v.spectrum().iter().zip(mult).map(|(a, b)| a * b).collect();
    Ok(SampledSignal::from_spectrum(&v.group, &s))
}

/// Outer fraction of the line window that must be empty before convolving.
const GUARD_FRACTION: f64 = 0.1;
const GUARD_TOL: f64 = 1e-13;

fn edge_ratio(s: &SampledSignal) -> f64 {
    let l = s.group.half_period();
    let sup = s.sup_norm();
    if sup == 0.0 {
        return 0.0;
    }
    let e = (0..s.values.len())
        .filter(|&j| s.group.dist(j) >= (1.0 - GUARD_FRACTION) * l)
        .map(|j| s.values[j].norm())
        .fold(0.0, f64::max);
    e / sup
}

/// Haar convolution by FFT (trapezoid weights).
pub fn convolve(phi: &SampledSignal, psi: &SampledSignal) -> Result<SampledSignal> {
    if phi.group != psi.group {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", phi.group, psi.group)));
    }
    if !phi.group.is_circle() {
        let e = edge_ratio(phi).max(edge_ratio(psi));
        if e > GUARD_TOL {
            return Err(Error::Wraparound { edge: e, tol: GUARD_TOL });
        }
    }
    let s: Vec<C> = phi.spectrum().iter().zip(psi.spectrum()).map(|(a, b)| a * b).collect();
    Ok(SampledSignal::from_spectrum(&phi.group, &s))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WaveResidual {
    pub k: i64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

const WAVE_PANEL: f64 = 0.2;
const WAVE_NODES: usize = 24;
const WAVE_TAIL: f64 = 1e-17;

/// Checks int f_hat(lambda) cos(lambda |k|) d lambda = f(|k|) per mode, with
/// f_hat(lambda) = pi^{-1} int_0^inf f(xi) cos(lambda xi) d xi.
pub fn wave_crosscheck(f: &EntireSymbol, modes: &[i64]) -> Result<Vec<WaveResidual>> {
    if !f.decaying {
        return Err(Error::Decay(format!("{} does not decay on the real line", f.name())));
    }
    let re = |x: f64| f.eval(C::new(x, 0.0)).re;
    let f0 = re(0.0).abs().max(1e-300);
    // frequency cutoff: two consecutive unit steps below the tail level
    let mut xi_max = 1.0;
    let mut quiet = 0;
    while quiet < 2 {
        if xi_max > 1e4 {
            return Err(Error::Truncation(format!("{} above {WAVE_TAIL:e} relative beyond xi = 1e4", f.name())));
        }
        if re(xi_max).abs() < WAVE_TAIL * f0 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        xi_max += 1.0;
    }
    let gl = GaussLegendre::new(WAVE_NODES);
    let panels = |hi: f64| -> Vec<(f64, f64)> {
        let np = (hi / WAVE_PANEL).ceil() as usize;
        let w = hi / np as f64;
        (0..np).flat_map(|i| gl.on(i as f64 * w, (i + 1) as f64 * w)).collect()
    };
    let xi_nodes = panels(xi_max);
    let fx: Vec<f64> = xi_nodes.iter().map(|&(x, w)| w * re(x)).collect();
    let f_hat = |lam: f64| xi_nodes.iter().zip(&fx).map(|(&(x, _), &wf)| wf * (lam * x).cos()).sum::<f64>() / PI;
    // lambda cutoff, by unit steps
    let fh0 = f_hat(0.0).abs().max(1e-300);
    let mut lam_max = 1.0;
    let mut quiet = 0;
    while quiet < 2 {
        if lam_max > 200.0 {
            return Err(Error::Truncation(format!("f_hat of {} not below tail level by lambda = 200", f.name())));
        }
        let m = (0..8).map(|i| f_hat(lam_max + i as f64 / 8.0).abs()).fold(0.0, f64::max);
        if m < 1e-15 * fh0 {
            quiet += 1;
        } else {
            quiet = 0;
        }
        lam_max += 1.0;
    }
    let lam_nodes = panels(lam_max);
    let fh: Vec<f64> = lam_nodes.iter().map(|&(l, w)| w * f_hat(l)).collect();
    Ok(modes
        .iter()
        .map(|&k| {
            let ka = k.unsigned_abs() as f64;
            let lhs = 2.0 * lam_nodes.iter().zip(&fh).map(|(&(l, _), &wf)| wf * (l * ka).cos()).sum::<f64>();
            let rhs = re(ka);
            WaveResidual { k, lhs, rhs, residual: (lhs - rhs).abs() }
        })
        .collect())
}

/// rho = kernel of e^{-lambda^2}; its mass must be 1 within 1e-12.
pub fn heat_kernel(group: &GroupSpec) -> Result<Kernel> {
    let k = kernel_of_symbol(&EntireSymbol::heat(), group, &ShiftPolicy::default())?;
    if (k.mass - 1.0).abs() > 1e-12 {
        return Err(Error::Resolution(format!("heat kernel mass {} differs from 1", k.mass)));
    }
    Ok(k)
}

#[derive(Clone, Debug)]
pub struct DistanceReport {
    pub signal: SampledSignal,
    /// sup |d~ - d| over the grid.
    pub sup_defect: f64,
    pub argmax: f64,
}

/// d~ = rho * d, the heat-smoothed distance to the identity.
pub fn regularized_distance(group: &GroupSpec) -> Result<DistanceReport> {
    let rho = heat_kernel(group)?;
    let signal = if group.is_circle() { distance_circle(&rho) } else { distance_line(&rho) };
    let mut sup_defect = 0.0;
    let mut argmax = 0.0;
    for j in 0..group.len() {
        let e = (signal.values[j].re - group.dist(j)).abs();
        if e > sup_defect {
            sup_defect = e;
            argmax = group.coord(j);
        }
    }
    Ok(DistanceReport { signal, sup_defect, argmax })
}

// d~(x) = x (2F - F_inf) - 2G + G_inf with F, G the running integrals of rho
// and y rho, by trapezoid with the endpoint derivative correction.
fn distance_line(rho: &Kernel) -> SampledSignal {
    let g = &rho.signal.group;
    let h = g.h();
    let idx = g.sorted_indices();
    let xs: Vec<f64> = idx.iter().map(|&j| g.coord(j)).collect();
    let r: Vec<f64> = idx.iter().map(|&j| rho.signal.values[j].re).collect();
    let yr: Vec<f64> = xs.iter().zip(&r).map(|(x, v)| x * v).collect();
    let n = xs.len();
    let deriv = |f: &[f64], i: usize| -> f64 {
        if i < 2 || i + 2 >= n {
            return 0.0;
        }
        (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h)
    };
    let running = |f: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        let mut t = 0.0;
        for i in 1..n {
            t += 0.5 * h * (f[i - 1] + f[i]);
            out[i] = t - h * h / 12.0 * deriv(f, i);
        }
        out
    };
    let big_f = running(&r);
    let big_g = running(&yr);
    let (f_inf, g_inf) = (big_f[n - 1], big_g[n - 1]);
    let mut out = SampledSignal::zeros(g);
    for (i, &j) in idx.iter().enumerate() {
        let x = xs[i];
        out.values[j] = C::new(x * (2.0 * big_f[i] - f_inf) - 2.0 * big_g[i] + g_inf, 0.0);
    }
    out
}

// d~(x) = int rho(y) d(x - y) dy over one period, split at the kink y = x,
// with rho from its nonzero Fourier modes.
fn distance_circle(rho: &Kernel) -> SampledSignal {
    let g = &rho.signal.group;
    let spec = rho.signal.spectrum();
    let modes: Vec<(f64, C)> = (0..g.len())
        .filter(|&k| spec[k].norm() > 0.0)
        .map(|k| (g.xi(k), spec[k] / (2.0 * PI)))
        .collect();
    let rho_at = |y: f64| modes.iter().map(|(k, c)| (c * C::from_polar(1.0, k * y)).re).sum::<f64>();
    let gl = GaussLegendre::new(20);
    let mut out = SampledSignal::zeros(g);
    for j in 0..g.len() {
        let x = g.coord(j);
        // d(x - y) = |x - y| on [x - pi, x + pi]
        let v = gl.composite(x - PI, x, 0.35, |y| rho_at(y) * (x - y))
            + gl.composite(x, x + PI, 0.35, |y| rho_at(y) * (y - x));
        out.values[j] = C::new(v, 0.0);
    }
    out
}

/// chi_delta = exp(-delta d~^2).
pub fn cutoff_chi(delta: f64, group: &GroupSpec) -> Result<SampledSignal> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("cutoff needs delta > 0, got {delta}")));
    }
    let d = regularized_distance(group)?;
    Ok(chi_from_distance(delta, &d.signal))
}

/// chi_delta from a precomputed regularized distance.
pub fn chi_from_distance(delta: f64, d: &SampledSignal) -> SampledSignal {
    let values = d.values.iter().map(|v| C::new((-delta * v.re * v.re).exp(), 0.0)).collect();
    SampledSignal { group: d.group.clone(), values, analyticity: None }
}
