use super::{alpha_ln_abs, beta, beta_ln_abs, erf, smoothed_log, WedgeRegion, EXP_LIMIT};
use crate::certificate::{judge, DecayCertificate};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::fmt;
use std::sync::Arc;

type C = Complex64;

pub type SymbolFn = Arc<dyn Fn(C) -> C + Send + Sync>;

#[derive(Clone)]
pub enum SymbolKind {
    Alpha { eps: f64 },
    Beta { eps: f64 },
    /// e^{-z^2}
    Heat,
    /// e^{sign m l(z)}
    SmoothedLogExp { m: f64, sign: f64 },
    /// e^{-g(z)}, g(z) = (r z / 2) erf z
    ErfLinear { r: f64 },
    /// 1/(1+z^2), the pole-bearing control
    Lorentzian,
    Cosh { eps: f64 },
    Constant { value: f64 },
    Product(Box<EntireSymbol>, Box<EntireSymbol>),
    Custom { name: String, f: SymbolFn, ln_abs: Option<SymbolLnAbs> },
}

pub type SymbolLnAbs = Arc<dyn Fn(C) -> f64 + Send + Sync>;

/// An even symbol with the data the calculus needs: a strip/sector where it
/// is holomorphic (used for contour shifts) and an optional claimed F_{c,theta}.
#[derive(Clone)]
pub struct EntireSymbol {
    pub kind: SymbolKind,
    pub decay_class: Option<(f64, f64)>,
    /// (N, theta): holomorphic and decaying on W_{N,theta}. N = 0 means no shift.
    pub wedge: (f64, f64),
    /// Whether |f| decays along the real axis at all.
    pub decaying: bool,
    /// Half-width of the horizontal strip where f is holomorphic and can be
    /// evaluated; infinite for entire symbols.
    pub strip: f64,
}

impl fmt::Debug for EntireSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EntireSymbol({})", self.describe())
    }
}

impl EntireSymbol {
    fn of(kind: SymbolKind, decay_class: Option<(f64, f64)>, wedge: (f64, f64), decaying: bool) -> Self {
        let strip = match &kind {
            SymbolKind::Lorentzian => 1.0,
            SymbolKind::SmoothedLogExp { .. } => super::SMOOTHED_LOG_STRIP,
            SymbolKind::Custom { ln_abs: None, .. } => 0.0,
            SymbolKind::Custom { .. } => wedge.0,
            SymbolKind::Product(a, b) => a.strip.min(b.strip),
            _ => f64::INFINITY,
        };
        EntireSymbol { kind, decay_class, wedge, decaying, strip }
    }

    pub fn alpha(eps: f64) -> Self {
        Self::of(SymbolKind::Alpha { eps }, Some((0.5 * eps, 0.5)), (2.0, 0.9), true)
    }

    pub fn beta(eps: f64) -> Self {
        Self::of(SymbolKind::Beta { eps }, Some((eps, 0.5)), (2.0, 0.9), true)
    }

    pub fn heat() -> Self {
        Self::of(SymbolKind::Heat, Some((5.0, 0.5)), (16.0, 0.9), true)
    }

    pub fn smoothed_log_exp(m: f64, sign: f64) -> Self {
        let decaying = sign < 0.0;
        Self::of(SymbolKind::SmoothedLogExp { m, sign }, None, if decaying { (2.5, 0.9) } else { (0.0, 0.0) }, decaying)
    }

    pub fn erf_linear(r: f64) -> Self {
        Self::of(SymbolKind::ErfLinear { r }, Some((0.25 * r, 0.5)), (2.0, 0.9), true)
    }

    pub fn lorentzian() -> Self {
        Self::of(SymbolKind::Lorentzian, None, (1.0, 0.0), true)
    }

    pub fn cosh(eps: f64) -> Self {
        Self::of(SymbolKind::Cosh { eps }, None, (0.0, 0.0), false)
    }

    pub fn constant(value: f64) -> Self {
        Self::of(SymbolKind::Constant { value }, None, (0.0, 0.0), false)
    }

    pub fn custom(name: &str, f: SymbolFn, decaying: bool) -> Self {
        Self::of(SymbolKind::Custom { name: name.to_string(), f, ln_abs: None }, None, (0.0, 0.0), decaying)
    }

    /// Custom symbol that also knows its holomorphy wedge and a log-modulus.
    pub fn custom_analytic(name: &str, f: SymbolFn, ln_abs: SymbolLnAbs, wedge: (f64, f64)) -> Self {
        Self::of(SymbolKind::Custom { name: name.to_string(), f, ln_abs: Some(ln_abs) }, None, wedge, true)
    }

    pub fn product(a: &EntireSymbol, b: &EntireSymbol) -> Self {
        // a decaying factor can still lose to a growing one
        let decaying = (a.decaying && b.decaying)
            || ((a.decaying || b.decaying) && {
                let m = |x: f64| (a.eval(C::new(x, 0.0)) * b.eval(C::new(x, 0.0))).norm();
                m(400.0) < m(200.0) && m(200.0) < 1e-3 * m(0.0).max(1e-300)
            });
        let wedge = if a.wedge.0 == 0.0 || b.wedge.0 == 0.0 {
            (0.0, 0.0)
        } else {
            (a.wedge.0.min(b.wedge.0), a.wedge.1.min(b.wedge.1))
        };
        Self::of(SymbolKind::Product(Box::new(a.clone()), Box::new(b.clone())), None, wedge, decaying)
    }

    pub fn with_decay_class(mut self, c: f64, theta: f64) -> Self {
        self.decay_class = Some((c, theta));
        self
    }

    pub fn name(&self) -> String {
        match &self.kind {
            SymbolKind::Alpha { .. } => "alpha".into(),
            SymbolKind::Beta { .. } => "beta".into(),
            SymbolKind::Heat => "heat".into(),
            SymbolKind::SmoothedLogExp { sign, .. } => {
                if *sign < 0.0 { "exp_minus_m_ell".into() } else { "exp_plus_m_ell".into() }
            }
            SymbolKind::ErfLinear { .. } => "exp_minus_g".into(),
            SymbolKind::Lorentzian => "lorentzian".into(),
            SymbolKind::Cosh { .. } => "cosh".into(),
            SymbolKind::Constant { .. } => "constant".into(),
            SymbolKind::Product(a, b) => format!("{}*{}", a.name(), b.name()),
            SymbolKind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn describe(&self) -> Value {
        let params = match &self.kind {
            SymbolKind::Alpha { eps } | SymbolKind::Beta { eps } | SymbolKind::Cosh { eps } => json!({ "eps": eps }),
            SymbolKind::SmoothedLogExp { m, sign } => json!({ "m": m, "sign": sign }),
            SymbolKind::ErfLinear { r } => json!({ "R": r }),
            SymbolKind::Constant { value } => json!({ "value": value }),
            SymbolKind::Product(a, b) => json!([a.describe(), b.describe()]),
            _ => json!({}),
        };
        json!({ "symbol": self.name(), "params": params })
    }

    pub fn eval(&self, z: C) -> C {
        match &self.kind {
            SymbolKind::Alpha { eps } => 2.0 * (-(*eps) * z * erf(z)).exp(),
            SymbolKind::Beta { eps } => beta(*eps, z).unwrap_or(C::new(f64::NAN, f64::NAN)),
            SymbolKind::Heat => (-z * z).exp(),
            SymbolKind::SmoothedLogExp { m, sign } => match smoothed_log(z) {
                Ok(l) => (*sign * *m * l).exp(),
                Err(_) => C::new(f64::NAN, f64::NAN),
            },
            SymbolKind::ErfLinear { r } => (-0.5 * *r * z * erf(z)).exp(),
            SymbolKind::Lorentzian => 1.0 / (1.0 + z * z),
            SymbolKind::Cosh { eps } => (*eps * z).cosh(),
            SymbolKind::Constant { value } => C::new(*value, 0.0),
            SymbolKind::Product(a, b) => a.eval(z) * b.eval(z),
            SymbolKind::Custom { f, .. } => f(z),
        }
    }

    /// ln|f(z)|, or an upper bound for it where |f| leaves f64 range.
    pub fn ln_abs(&self, z: C) -> f64 {
        match &self.kind {
            SymbolKind::Alpha { eps } => alpha_ln_abs(*eps, z),
            SymbolKind::Beta { eps } => beta_ln_abs(*eps, z),
            SymbolKind::Heat => -(z * z).re,
            SymbolKind::SmoothedLogExp { m, sign } => match smoothed_log(z) {
                Ok(l) => *sign * *m * l.re,
                Err(_) => f64::INFINITY,
            },
            SymbolKind::ErfLinear { r } => alpha_ln_abs(0.5 * *r, z) - 2f64.ln(),
            SymbolKind::Lorentzian => -(1.0 + z * z).norm().ln(),
            SymbolKind::Cosh { eps } => {
                let w = *eps * if z.re < 0.0 { -z } else { z };
                (w + (0.5 * (1.0 + (-2.0 * w).exp())).ln()).re
            }
            SymbolKind::Constant { value } => value.abs().ln(),
            SymbolKind::Product(a, b) => a.ln_abs(z) + b.ln_abs(z),
            SymbolKind::Custom { f, ln_abs, .. } => match ln_abs {
                Some(g) => g(z),
                None => f(z).norm().ln(),
            },
        }
    }

    /// Evenness probe on a fixed set of points; NOT_EVEN on failure.
    pub fn check_even(&self) -> Result<()> {
        const PROBES: [(f64, f64); 6] = [(0.3, 0.0), (1.7, 0.0), (4.2, 0.0), (11.0, 0.0), (0.9, 0.4), (2.5, -0.3)];
        for (x, y) in PROBES {
            let z = C::new(x, y);
            let (a, b) = (self.eval(z), self.eval(-z));
            if !(a.is_finite() && b.is_finite()) {
                continue;
            }
            let r = (a - b).norm();
            if r > 1e-12 * a.norm().max(1.0) {
                return Err(Error::NotEven { residual: r, at: format!("{z}") });
            }
        }
        Ok(())
    }

    /// Largest shift sigma usable at distance x: min(N - 0.5, theta x / 2).
    pub fn contour_shift(&self, x: f64) -> f64 {
        let (n, theta) = self.wedge;
        if n <= 0.5 {
            return 0.0;
        }
        (n - 0.5).min(0.5 * theta * x.abs()).max(0.0)
    }
}

/// Sampling of a wedge up to `radius`: `n_r` radial and `n_t` transverse steps.
#[derive(Clone, Copy, Debug)]
pub struct SymbolGrid {
    pub radius: f64,
    pub n_r: usize,
    pub n_t: usize,
}

impl Default for SymbolGrid {
    fn default() -> Self {
        SymbolGrid { radius: 40.0, n_r: 400, n_t: 17 }
    }
}

/// sup |f(z)| e^{c|z|} over a sampling of W, with a shell-growth verdict.
pub fn decay_certificate_symbol(f: &EntireSymbol, c: f64, w: &WedgeRegion, grid: &SymbolGrid) -> DecayCertificate {
    let mut pts: Vec<C> = Vec::new();
    let nr = grid.n_r.max(2);
    let nt = grid.n_t.max(2);
    // strip part
    for i in 0..=nr {
        let x = -grid.radius + 2.0 * grid.radius * i as f64 / nr as f64;
        for j in 0..nt {
            let y = w.n * (1.0 - 1e-9) * (2.0 * j as f64 / (nt - 1) as f64 - 1.0);
            pts.push(C::new(x, y));
        }
    }
    // sector part, both directions
    let phi_max = w.theta.atan() * (1.0 - 1e-9);
    for i in 1..=nr {
        let r = grid.radius * i as f64 / nr as f64;
        for j in 0..nt {
            let phi = phi_max * (2.0 * j as f64 / (nt - 1) as f64 - 1.0);
            let z = C::from_polar(r, phi);
            pts.push(z);
            pts.push(-z);
        }
    }
    let samples = pts
        .into_iter()
        .filter(|z| z.norm() <= grid.radius * (1.0 + 1e-12) && w.contains(*z))
        .map(|z| {
            let lv = f.ln_abs(z) + c * z.norm();
            let lv = if lv > EXP_LIMIT * 1e6 { f64::INFINITY } else { lv };
            (z.norm(), lv, (z.re, z.im))
        });
    let entry = judge(c, grid.radius, samples, None);
    DecayCertificate::new(format!("{} in F_(c,theta) over W({}, {})", f.name(), w.n, w.theta), grid.radius, vec![entry])
}
