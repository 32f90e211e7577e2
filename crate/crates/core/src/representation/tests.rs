use super::*;
use crate::multiplier::{apply_multiplier, convolve, heat_kernel, kernel_of_symbol, ShiftPolicy};
use crate::symbols::{alpha, beta, EntireSymbol};
use proptest::prelude::*;
use std::sync::OnceLock;

fn line_rep() -> &'static BanachRepSpec {
    static R: OnceLock<BanachRepSpec> = OnceLock::new();
    R.get_or_init(|| BanachRepSpec::translation(&GroupSpec::default_line()))
}

fn circle_rep() -> BanachRepSpec {
    BanachRepSpec::translation(&GroupSpec::circle(256).unwrap())
}

fn lorentzian() -> RepVector {
    RepVector::of_kind(line_rep(), &VectorKind::Lorentzian { b: 1.0, shift: 0.0 }).unwrap()
}

fn mode(k: i64) -> RepVector {
    RepVector::of_kind(&circle_rep(), &VectorKind::Mode { k }).unwrap()
}

fn real(x: f64) -> C {
    C::new(x, 0.0)
}

// periodized Lorentzian at a complex point
fn lorentzian_periodized(z: C, t: f64) -> C {
    let q = PI / t;
    real(PI / (2.0 * t) * q.sinh()) / (real(q.cosh()) - (z * (PI / t)).cos())
}

#[test]
fn parsing_and_ids() {
    assert_eq!(VectorKind::parse("mode3").unwrap(), VectorKind::Mode { k: 3 });
    assert_eq!(VectorKind::parse("lorentzian").unwrap().id(), "lorentzian(b=1,s=0)");
    assert_eq!(VectorKind::parse("bogus").unwrap_err().code(), "CONFIG");
}

#[test]
fn periodized_lorentzian_matches_its_spectrum() {
    let v = lorentzian();
    let g = &v.rep.group;
    let s = v.data.spectrum();
    for k in [0usize, 1, 100, 500] {
        let want = PI * (-g.xi(k).abs()).exp();
        assert!((s[k].re - want).abs() < 1e-12, "{k}");
    }
    // and differs from 1/(1+x^2) only by the images
    let e = v.exact.as_ref().unwrap();
    let images: f64 = (1..1_000_000).map(|n| 2.0 / (1.0 + (128.0 * n as f64).powi(2))).sum::<f64>() + 2.0 / (128.0f64.powi(2) * 1e6);
    assert!((v.data.values[0].re - e(0.0).re - images).abs() < 1e-12);
}

#[test]
fn orbit_map_identity_and_cocycle() {
    let v = RepVector::of_kind(line_rep(), &VectorKind::Gaussian { a: 1.0, shift: 0.5 }).unwrap();
    let o = OrbitMap::new(&v);
    assert_eq!(o.at(0.0).data.values, v.data.values);
    assert!(o.cocycle_defect(0.3, 1.7) < 1e-10);
    assert!(o.cocycle_defect(-2.0 * line_rep().group.h(), 5.0 * line_rep().group.h()) == 0.0);
    assert!((o.eval(1.2, 0.3) - real((-(1.0f64).powi(2)).exp())).norm() < 1e-15);
}

#[test]
fn translations_are_isometric() {
    let probes = [lorentzian(), RepVector::of_kind(line_rep(), &VectorKind::Gaussian { a: 2.0, shift: -1.0 }).unwrap()];
    let h = line_rep().group.h();
    let m = operator_norm_probe(&[h, 17.0 * h, -1000.0 * h], &probes);
    assert_eq!(m, 1.0);
    let r = line_rep().clone().with_weight(0.5, 2.0);
    assert!((r.weight_at(2.0) - 2.0 * 1f64.exp()).abs() < 1e-15);
    assert!(r.weight_at(1.0) * r.weight_at(2.0) >= r.weight_at(3.0));
}

#[test]
fn pi_of_heat_on_a_circle_mode() {
    let v = mode(1);
    let rho = heat_kernel(&v.rep.group).unwrap();
    let out = pi_apply(&rho.signal, &v).unwrap();
    assert!(out.data.max_abs_diff(&v.data.scale(real((-1.0f64).exp()))) < 1e-15);
    assert!(pi_bound(&rho.signal, &v) >= out.norm());
}

#[test]
fn pi_of_alpha_kernel_on_constant() {
    let v = RepVector::of_kind(&circle_rep(), &VectorKind::Constant).unwrap();
    let k = kernel_of_symbol(&EntireSymbol::alpha(0.25), &v.rep.group, &ShiftPolicy::default()).unwrap();
    let out = pi_apply(&k.signal, &v).unwrap();
    assert!(out.data.max_abs_diff(&v.data.scale(real(2.0))) < 1e-13);
}

#[test]
fn pi_of_narrow_gaussian_is_near_identity() {
    let v = RepVector::of_kind(line_rep(), &VectorKind::Gaussian { a: 0.5, shift: 1.0 }).unwrap();
    let w = 0.01;
    let phi = SampledSignal::from_fn(&v.rep.group, |x| (-x * x / (2.0 * w * w)).exp() / (w * (2.0 * PI).sqrt()));
    let out = pi_apply(&phi, &v).unwrap();
    assert!(out.data.max_abs_diff(&v.data) < 1e-4);
}

#[test]
fn pi_needs_a_decaying_function() {
    let v = lorentzian();
    let phi = SampledSignal::from_fn(&v.rep.group, |x| 1.0 / (1.0 + x * x));
    assert_eq!(pi_apply(&phi, &v).unwrap_err().code(), "DECAY");
}

#[test]
fn cosh_series_on_modes() {
    for k in [0i64, 1, 3] {
        let v = mode(k);
        let s = cosh_series_apply(0.7, &v, 1e-14).unwrap();
        let want = v.data.scale(real((0.7 * k as f64).cosh()));
        assert!(s.vector.data.max_abs_diff(&want) < 1e-13);
    }
}

#[test]
fn cosh_series_on_lorentzian() {
    let v = lorentzian();
    let t = v.rep.group.half_period();
    let s = cosh_series_apply(0.25, &v, 1e-13).unwrap();
    // cosh(eps sqrt(Delta)) v = average of v(x +- i eps)
    let mut err: f64 = 0.0;
    for j in (0..v.rep.group.len()).step_by(7) {
        let x = v.rep.group.coord(j);
        let want = 0.5 * (lorentzian_periodized(C::new(x, 0.25), t) + lorentzian_periodized(C::new(x, -0.25), t));
        err = err.max((s.vector.data.values[j] - want).norm());
    }
    assert!(err < 1e-9, "{err:e}");
    assert!(s.j <= COSH_J_MAX && s.tail_bound <= 1e-13);
    assert!(s.ratio.unwrap() < 0.1);
    let direct = apply_multiplier(&EntireSymbol::cosh(0.25), &v.data).unwrap();
    assert!(s.vector.data.max_abs_diff(&direct) < 1e-9);
    assert!(s.fd_check.iter().all(|&e| e < 1e-6), "{:?}", s.fd_check);
}

#[test]
fn cosh_series_diverges_past_the_strip() {
    let e = cosh_series_apply(2.0, &lorentzian(), 1e-13).unwrap_err();
    assert_eq!(e.code(), "DIVERGENT");
    let e = cosh_series_apply(1.5, &lorentzian(), 1e-13).unwrap_err();
    assert_eq!(e.code(), "DIVERGENT");
    let v = RepVector::of_kind(line_rep(), &VectorKind::AbsGaussian).unwrap();
    assert_eq!(cosh_series_apply(0.25, &v, 1e-13).unwrap_err().code(), "RESOLUTION");
}

#[test]
fn delta_analytic_verdicts() {
    let r = delta_analytic_check(&mode(1), 3.0, 20);
    assert_eq!(r.verdict, SeriesVerdict::Convergent);
    // |Delta^j mode| = 1: partial sums of sum 3^j/(2j)!
    let s: f64 = (0..=20).map(|j| 3f64.powi(j) / (1..=2 * j).map(|i| i as f64).product::<f64>()).sum();
    assert!((r.partial_sums[20] - s).abs() < 1e-12 * s);
    let v = lorentzian();
    let r = delta_analytic_check(&v, 0.5, 12);
    assert_eq!(r.verdict, SeriesVerdict::Convergent);
    assert!(r.bound_ok);
    // |Delta^j v| = (2j)! at x = 0, so terms are eps^j while resolved
    for j in 1..=r.reliable_up_to {
        assert!((r.ln_terms[j] - j as f64 * 0.5f64.ln()).abs() < 2e-3, "{j}");
    }
    let r = delta_analytic_check(&v, 1.5, 12);
    assert_eq!(r.verdict, SeriesVerdict::Divergent);
    let r = delta_analytic_check(&RepVector::of_kind(line_rep(), &VectorKind::AbsGaussian).unwrap(), 0.5, 12);
    assert_eq!(r.verdict, SeriesVerdict::Inconclusive);
}

#[test]
fn analyticity_radius_examples() {
    let g = RepVector::of_kind(line_rep(), &VectorKind::Gaussian { a: 1.0, shift: 0.0 }).unwrap();
    let a = analyticity_radius(&g);
    assert!(a.capped && a.radius == 4.0);
    let narrow = RepVector::of_kind(line_rep(), &VectorKind::Gaussian { a: 4.0, shift: 2.0 }).unwrap();
    assert!(analyticity_radius(&narrow).capped);
    let a = analyticity_radius(&lorentzian());
    assert!(!a.capped && (a.radius - 1.0).abs() < 0.2, "{a:?}");
    let half = RepVector::of_kind(line_rep(), &VectorKind::Lorentzian { b: 0.5, shift: 3.0 }).unwrap();
    let a = analyticity_radius(&half);
    assert!((a.radius - 0.5).abs() < 0.1, "{a:?}");
    let a = analyticity_radius(&RepVector::of_kind(line_rep(), &VectorKind::AbsGaussian).unwrap());
    assert_eq!(a.radius, 0.0);
    assert!(analyticity_radius(&mode(2)).capped);
}

#[test]
fn factorize_circle_modes() {
    for k in [-32i64, -5, 0, 1, 7, 32] {
        let f = factorize(&mode(k), 0.5).unwrap();
        assert!(f.error <= 1e-11, "k = {k}: {:e}", f.error);
    }
    // the scalar identity behind it
    let z = real(7.0);
    let id = alpha(0.5, z).unwrap() * (0.5 * z).cosh() + beta(0.5, z).unwrap();
    assert!((id - 1.0).norm() < 1e-15);
    let c = RepVector::of_kind(&circle_rep(), &VectorKind::Constant).unwrap();
    assert!(factorize(&c, 1.3).unwrap().error < 1e-13);
}

#[test]
fn factorize_lorentzian() {
    let f = factorize(&lorentzian(), 0.25).unwrap();
    assert!(f.error <= 1e-8, "{:e}", f.error);
    assert!(f.kappa_alpha.symmetric && f.kappa_beta.symmetric);
    assert_eq!(factorize(&lorentzian(), 2.0).unwrap_err().code(), "DIVERGENT");
    let z = RepVector::of_kind(line_rep(), &VectorKind::Zero).unwrap();
    assert_eq!(factorize(&z, 0.5).unwrap().error, 0.0);
}

#[test]
fn derivative_growth() {
    let f = derivative_growth_probe(&mode(1), 12);
    assert!(f.pass && (f.r - 1.0).abs() < 1e-12 && (f.c_p - 1.0).abs() < 1e-12, "{f:?}");
    let f = derivative_growth_probe(&lorentzian(), 12);
    // |d^k v| = k! for even k
    assert!(f.pass && (f.r - 1.0).abs() < 0.2, "{f:?}");
    assert!((f.ln_norms[4] - 24f64.ln()).abs() < 1e-9);
    let f = derivative_growth_probe(&RepVector::of_kind(line_rep(), &VectorKind::AbsGaussian).unwrap(), 12);
    assert!(!f.pass, "{f:?}");
}

#[test]
fn cutoff_probe_gaussian() {
    let v = RepVector::of_kind(line_rep(), &VectorKind::Gaussian { a: 0.05, shift: 0.0 }).unwrap();
    let r = cutoff_convergence_probe(&v, &[1.0, 0.1, 0.01, 0.0], 0.25).unwrap();
    assert!(r.monotone);
    assert_eq!(r.rows.last().unwrap().compact_errors[2].1, 0.0);
    for row in &r.rows {
        assert!(row.pipeline_residual.unwrap() < 1e-10, "{row:?}");
    }
}

#[test]
fn pi_is_an_algebra_action() {
    let v = lorentzian();
    let g = &v.rep.group;
    let p = ShiftPolicy::default();
    let ka = kernel_of_symbol(&EntireSymbol::alpha(0.3), g, &p).unwrap().signal;
    let kh = heat_kernel(g).unwrap().signal;
    let lhs = pi_apply(&convolve(&ka, &kh).unwrap(), &v).unwrap();
    let rhs = pi_apply(&ka, &pi_apply(&kh, &v).unwrap()).unwrap();
    assert!(lhs.data.max_abs_diff(&rhs.data) < 1e-12);
}

#[test]
fn delta_analytic_matches_factorize() {
    let vs = [
        lorentzian(),
        RepVector::of_kind(line_rep(), &VectorKind::Gaussian { a: 1.0, shift: 0.0 }).unwrap(),
        mode(3),
    ];
    for v in &vs {
        for eps in [0.25, 0.5, 1.5, 2.0] {
            let ok = factorize(v, eps).is_ok();
            let conv = delta_analytic_check(v, eps, 30).verdict == SeriesVerdict::Convergent;
            assert_eq!(ok, conv, "{} eps = {eps}", v.id);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cosh_series_matches_multiplier(eps in 0.05f64..0.35, b in 0.9f64..2.0, s in -5.0f64..5.0) {
        let v = RepVector::of_kind(line_rep(), &VectorKind::Lorentzian { b, shift: s }).unwrap();
        let series = cosh_series_apply(eps, &v, 1e-13).unwrap();
        let direct = apply_multiplier(&EntireSymbol::cosh(eps), &v.data).unwrap();
        prop_assert!(series.vector.data.max_abs_diff(&direct) < 1e-9);
    }

    #[test]
    fn mode_factorization_exact(k in -32i64..=32, eps in 0.15f64..1.0) {
        prop_assert!(factorize(&mode(k), eps).unwrap().error <= 1e-11);
    }

    #[test]
    fn grid_shifts_preserve_norm(steps in -5000i64..5000) {
        let v = lorentzian();
        let h = v.rep.group.h();
        prop_assert_eq!(v.translate(steps as f64 * h).norm(), v.norm());
    }
}

