//! Acceptance matrix: one PASS/FAIL line per criterion.
//!
//! Tolerances are pinned here and compared with the limit each check reports,
//! so loosening one in the library fails this test.

use anfact::cli::criteria::Criterion;
use anfact::cli::Entry;
use std::time::Instant;

/// (criterion, check name, limit)
const PINNED: &[(u8, &str, f64)] = &[
    (1, "absolute residual", 1e-12),
    (1, "scaled residual", 1e-12),
    (3, "heat kernel sup error", 1e-10),
    (3, "gaussian*gaussian sup error", 1e-10),
    (4, "heat max residual k<=10", 1e-8),
    (4, "alpha(0.5) max residual k<=10", 1e-8),
    (5, "|d(0) - 2/sqrt(pi)|", 1e-10),
    (6, "circle modes |k|<=32, eps=0.5", 1e-11),
    (6, "lorentzian, eps=0.25", 1e-7),
    (7, "max |series - multiplier|", 1e-9),
    (8, "mismatched (v, eps) pairs", 0.0),
    (9, "bump m=8 error", 1e-6),
    (10, "reconstruction error", 1e-4),
    (10, "contour independence", 1e-8),
    (10, "inversion normalization", 1e-6),
    (11, "line convolution associativity", 1e-9),
    (11, "line Pi homomorphism", 1e-9),
    (11, "circle convolution associativity", 1e-9),
    (11, "circle Pi homomorphism", 1e-9),
];

/// Criteria that cannot pass as stated, with the checks expected to fail.
const KNOWN_UNATTAINABLE: &[(u8, &[&str], &str)] = &[(
    1,
    &["absolute residual"],
    "near the imaginary axis alpha cosh and beta are each of size e^{|a|} (past f64 range at some \
     wedge points) and cancel to 1, so the absolute residual is at least machine epsilon times that \
     size; the scaled residual passes",
)];

/// Flag checks each criterion must report.
const FLAGS: &[(u8, &[&str])] = &[
    (2, &["kappa_alpha(0.1) n=1 finite", "kappa_alpha(0.1) n=2 finite", "kappa_alpha(0.1) n=3 finite", "kappa_alpha(0.1) n=4 finite", "lorentzian control n=2 not certified"]),
    (5, &["sup |d - |x|| on [-50,50] attained at 0", "sup finite"]),
    (6, &["lorentzian, eps=2 fails DIVERGENT"]),
    (9, &["Psi_8 phi n=1 finite", "Psi_8 phi n=2 finite", "Psi_8 phi n=3 finite", "psi_8 n=1 finite", "psi_8 n=2 finite", "psi_8 n=3 finite", "probe k=0: m=1 fails, m=2 passes", "probe k=4: m=5 fails, m=6 passes"]),
];

fn line(e: &Entry, secs: f64, note: &str) -> String {
    let status = if e.outcome.pass { "PASS" } else { "FAIL" };
    let worst: Vec<String> = e
        .outcome
        .checks
        .iter()
        .filter_map(|c| c.value.map(|v| format!("{}={v:.2e}", c.name)))
        .collect();
    format!("criterion {:>2} {status} {:<40} {:>6.1}s  {}{note}", e.id, e.title, secs, worst.join("; "))
}

#[test]
fn acceptance_matrix() {
    let mut failures = Vec::new();
    for n in 1..=11u8 {
        let t = Instant::now();
        let e = Criterion::Numbered(n).entry();
        let secs = t.elapsed().as_secs_f64();
        let known = KNOWN_UNATTAINABLE.iter().find(|k| k.0 == n);
        let note = known.map(|k| format!("  [known unattainable: {}]", k.2)).unwrap_or_default();
        println!("{}", line(&e, secs, &note));
        if let Some(err) = &e.outcome.error {
            println!("    error {}: {}", err.code, err.message);
        }

        // limits match the pinned table, and every pinned check was reported
        for c in &e.outcome.checks {
            if let Some(limit) = c.limit {
                match PINNED.iter().find(|p| p.0 == n && p.1 == c.name) {
                    Some(p) if p.2 == limit => {}
                    Some(p) => failures.push(format!("{n}: {} limit {limit:e}, pinned {:e}", c.name, p.2)),
                    None => failures.push(format!("{n}: unpinned check {}", c.name)),
                }
            }
        }
        for p in PINNED.iter().filter(|p| p.0 == n) {
            if !e.outcome.checks.iter().any(|c| c.name == p.1) {
                failures.push(format!("{n}: missing check {}", p.1));
            }
        }
        for f in FLAGS.iter().filter(|f| f.0 == n).flat_map(|f| f.1.iter()) {
            if !e.outcome.checks.iter().any(|c| c.name == *f) {
                failures.push(format!("{n}: missing check {f}"));
            }
        }

        match known {
            Some((_, expected, _)) => {
                // still fails, and only where expected
                let failed: Vec<&str> = e.outcome.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                if e.outcome.pass || e.outcome.error.is_some() || failed != *expected {
                    failures.push(format!("{n}: known-unattainable criterion changed: failing checks {failed:?}"));
                }
            }
            None if !e.outcome.pass => failures.push(format!("{n}: FAIL")),
            None => {}
        }
    }
    let control = Criterion::Control.entry();
    println!("control      {} (must fail)", if control.outcome.pass { "PASS" } else { "FAIL" });
    if control.outcome.pass {
        failures.push("negative control passed".into());
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
