//! Decay certificates: measured weighted suprema with a finiteness verdict.
//!
//! A weight entry is FINITE when either the running supremum stops growing
//! over the two outermost dyadic shells (the empirical rule), or a
//! shifted-contour bound exists and the grid supremum sits below it.
//! Neither is a proof; reports say which rule fired.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Finite,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    ShellStable,
    ContourBound,
    /// Bounded distance (compact group): any finite sup is a certificate.
    Compact,
    None,
}

/// Allowed relative growth of the running sup across the outermost shells.
pub const SHELL_GROWTH_TOL: f64 = 0.01;

#[derive(Clone, Debug, Serialize)]
pub struct WeightEntry {
    pub n: f64,
    /// ln of the measured weighted supremum (sups can exceed f64 range).
    pub ln_sup: f64,
    pub argmax: (f64, f64),
    /// ln(sup over r <= R) - ln(sup over r <= R/2).
    pub ln_shell_growth: f64,
    /// ln of the shifted-contour upper bound, when one is available.
    pub ln_contour_bound: Option<f64>,
    pub rule: Rule,
    pub verdict: Verdict,
}

impl WeightEntry {
    pub fn sup(&self) -> f64 {
        self.ln_sup.exp()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayCertificate {
    pub subject: String,
    pub radius: f64,
    pub entries: Vec<WeightEntry>,
    pub verdict: Verdict,
}

impl DecayCertificate {
    pub fn new(subject: impl Into<String>, radius: f64, entries: Vec<WeightEntry>) -> Self {
        let verdict = if !entries.is_empty() && entries.iter().all(|e| e.verdict == Verdict::Finite) {
            Verdict::Finite
        } else {
            Verdict::Inconclusive
        };
        DecayCertificate { subject: subject.into(), radius, entries, verdict }
    }

    pub fn entry(&self, n: f64) -> Option<&WeightEntry> {
        self.entries.iter().find(|e| (e.n - n).abs() < 1e-12)
    }
}

/// Weighted samples `(r, ln value, location)` reduced to a weight entry.
pub fn judge(
    n: f64,
    radius: f64,
    samples: impl IntoIterator<Item = (f64, f64, (f64, f64))>,
    ln_contour_bound: Option<f64>,
) -> WeightEntry {
    let mut ln_sup = f64::NEG_INFINITY;
    let mut ln_inner = f64::NEG_INFINITY;
    let mut argmax = (0.0, 0.0);
    for (r, lv, at) in samples {
        let lv = if lv.is_nan() { f64::INFINITY } else { lv };
        if lv > ln_sup {
            ln_sup = lv;
            argmax = at;
        }
        if r <= 0.5 * radius && lv > ln_inner {
            ln_inner = lv;
        }
    }
    let ln_shell_growth = if ln_sup == f64::NEG_INFINITY { 0.0 } else { ln_sup - ln_inner };
    // an identically zero function is trivially bounded
    let shell_ok = ln_sup == f64::NEG_INFINITY || (ln_sup.is_finite() && ln_shell_growth < (1.0 + SHELL_GROWTH_TOL).ln());
    let bound_ok = match ln_contour_bound {
        Some(b) => b.is_finite() && ln_sup <= b + 1e-9 * b.abs().max(1.0),
        None => false,
    };
    let (rule, verdict) = if shell_ok {
        (Rule::ShellStable, Verdict::Finite)
    } else if bound_ok {
        (Rule::ContourBound, Verdict::Finite)
    } else {
        (Rule::None, Verdict::Inconclusive)
    };
    WeightEntry { n, ln_sup, argmax, ln_shell_growth, ln_contour_bound, rule, verdict }
}

/// Certificate entry on a compact group: FINITE iff the sup is finite.
pub fn judge_compact(n: f64, samples: impl IntoIterator<Item = (f64, f64, (f64, f64))>) -> WeightEntry {
    let mut e = judge(n, f64::INFINITY, samples, None);
    e.ln_shell_growth = 0.0;
    if e.ln_sup.is_finite() {
        e.rule = Rule::Compact;
        e.verdict = Verdict::Finite;
    }
    e
}
