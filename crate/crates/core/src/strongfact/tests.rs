use super::*;
use crate::certificate::Verdict;
use crate::multiplier::kernel_of_symbol;
use crate::representation::{BanachRepSpec, OrbitMap, RepVector, VectorKind};
use proptest::prelude::*;

fn grid() -> &'static GroupSpec {
    static G: OnceLock<GroupSpec> = OnceLock::new();
    G.get_or_init(testfn_grid)
}

fn bump() -> &'static TestFunction {
    static B: OnceLock<TestFunction> = OnceLock::new();
    B.get_or_init(|| TestFunction::bump(grid(), 1.0).unwrap())
}

fn line_vector(kind: VectorKind) -> RepVector {
    RepVector::of_kind(&BanachRepSpec::translation(&GroupSpec::default_line()), &kind).unwrap()
}

fn lorentzian() -> &'static RepVector {
    static V: OnceLock<RepVector> = OnceLock::new();
    V.get_or_init(|| line_vector(VectorKind::Lorentzian { b: 1.0, shift: 0.0 }))
}

fn all_finite(c: &DecayCertificate) -> bool {
    c.entries.iter().all(|e| e.verdict == Verdict::Finite)
}

#[test]
fn bump_spectrum_oracle() {
    let b = bump();
    let at = |x: f64| b.spectrum_at(C::new(x, 0.0));
    assert!((at(0.0).re - 0.443993816168079437823).abs() < 1e-14);
    assert!((at(5.0).re + 2.1224991443751581154e-4).abs() < 1e-15);
    assert!((at(50.0).re + 6.6615058862461794543e-5).abs() < 1e-16);
    assert!(at(50.0).im.abs() < 1e-18);
    // and agrees with the sample transform where that is accurate
    let s = b.signal.spectrum();
    for k in [0usize, 3, 100, 600] {
        assert!((s[k] - b.spectrum[k]).norm() < 1e-13, "{k}");
    }
    // decays like e^{-sqrt(xi)}, far below the sample-transform floor
    let (_, l) = *b.decay_record.last().unwrap();
    assert!(l < -95.0 && l > -115.0, "{l}");
}

#[test]
fn scaled_bump_spectrum() {
    let b = TestFunction::bump(grid(), 2.0).unwrap();
    let s = b.signal.spectrum();
    assert!((s[0].re - 2.0 * 0.443993816168079437823).abs() < 1e-13);
    assert!((s[40] - b.spectrum[40]).norm() < 1e-13);
}

#[test]
fn testfn_bump_m8() {
    let f = strong_factorize_testfn(bump(), 8).unwrap();
    assert!(f.error <= 1e-6, "{:e}", f.error);
    assert!(f.psi_m.symmetric);
    assert!(f.edge_ratio < 1e-12);
}

#[test]
fn testfn_zero() {
    let z = TestFunction::zero(grid());
    let f = strong_factorize_testfn(&z, 6).unwrap();
    assert_eq!(f.error, 0.0);
    assert_eq!(f.psi_phi.sup_norm(), 0.0);
}

#[test]
fn testfn_gaussian_m6() {
    let g = TestFunction::gaussian(grid(), 1.0).unwrap();
    let f = strong_factorize_testfn(&g, 6).unwrap();
    assert!(f.error <= 1e-8, "{:e}", f.error);
    assert!(all_finite(&f.psi_phi_certificate), "{:?}", f.psi_phi_certificate);
    assert!(all_finite(&f.psi_m_certificate), "{:?}", f.psi_m_certificate);
}

#[test]
fn testfn_errors() {
    assert_eq!(strong_factorize_testfn(bump(), 3).unwrap_err().code(), "DOMAIN");
    let narrow = TestFunction::bump(grid(), 0.05).unwrap();
    assert_eq!(strong_factorize_testfn(&narrow, 16).unwrap_err().code(), "RESOLUTION");
}

#[test]
fn testfn_errors_by_m() {
    // rounding in Psi_m phi grows like its sup, so the error grows with m
    let errs: Vec<f64> = [4, 6, 8].iter().map(|&m| strong_factorize_testfn(bump(), m).unwrap().error).collect();
    assert!(errs.iter().all(|&e| e <= 1e-6), "{errs:?}");
    assert!(errs[0] < errs[2], "{errs:?}");
}

#[test]
fn regularity_probe_examples() {
    assert!(psi_regularity_probe(8, 2).pass);
    assert!(!psi_regularity_probe(2, 2).pass);
    for m in 2..=6 {
        assert!(psi_regularity_probe(m, 0).pass, "m = {m}");
    }
    for k in 0..=4 {
        let below = psi_regularity_probe(k + 1, k);
        let at = psi_regularity_probe(k + 2, k);
        assert!(!below.pass && at.pass, "k = {k}: {below:?} {at:?}");
        assert!((at.ratio - 0.5).abs() < 0.01);
    }
}

#[test]
fn fourier_plus_gaussian() {
    let v = line_vector(VectorKind::Gaussian { a: 1.0, shift: 0.0 });
    let o = OrbitMap::new(&v);
    let f = contour_fourier_plus(&o, C::new(0.0, 2.0), 0.0, 0.25).unwrap();
    assert!((f.re - 0.378936078070656053022).abs() < 1e-12 && f.im.abs() < 1e-14, "{f}");
    // F_- mirrors: -int_0^inf e^{-t^2} e^{-2t} dt
    let m = contour_fourier_minus(&o, C::new(0.0, -2.0), 0.0, 0.25).unwrap();
    assert!((m + f).norm() < 1e-12);
}

#[test]
fn fourier_constant_is_a_pole() {
    let v = line_vector(VectorKind::Constant);
    let o = OrbitMap::new(&v);
    for z in [C::new(0.3, 0.6), C::new(-2.0, 1.0)] {
        let f = contour_fourier_plus(&o, z, 0.0, 0.25).unwrap();
        assert!((f - C::i() / z).norm() < 1e-10, "{f}");
        let m = contour_fourier_minus(&o, z.conj(), 0.0, 0.25).unwrap();
        assert!((m - C::i() / z.conj()).norm() < 1e-10, "{m}");
    }
}

#[test]
fn fourier_contour_errors() {
    let o = OrbitMap::new(lorentzian());
    assert_eq!(contour_fourier_plus(&o, C::new(0.0, 0.25), 0.0, 0.25).unwrap_err().code(), "CONTOUR");
    assert_eq!(contour_fourier_minus(&o, C::new(0.0, 0.1), 0.0, 0.25).unwrap_err().code(), "CONTOUR");
    assert_eq!(contour_fourier_plus(&o, C::new(0.0, 0.25 + 1e-9), 0.0, 0.25).unwrap_err().code(), "TRUNCATION");
    let z = line_vector(VectorKind::Zero);
    assert_eq!(contour_fourier_plus(&OrbitMap::new(&z), C::new(1.0, 1.0), 0.0, 0.25).unwrap(), C::new(0.0, 0.0));
}

#[test]
fn hyper_lorentzian() {
    let f = strong_factorize_vector(lorentzian(), 0.25, 0.75).unwrap();
    assert!(f.error <= 1e-4, "{:e}", f.error);
    assert!(f.sup_error <= 1e-12, "{:e}", f.sup_error);
    assert!(f.contour_independence <= 1e-8, "{:e}", f.contour_independence);
    assert!(f.inversion_residual <= 1e-6, "{:e}", f.inversion_residual);
    assert!(all_finite(&f.factor_certificate), "{:?}", f.factor_certificate);
    assert_eq!(f.eval_points.len(), 17);
    // factor kernel against quadrature of (1/pi) int_0^inf e^{-g} cos(x xi) d xi
    let k = &f.factor_kernel.signal;
    assert!((k.values[0].re - 0.872405225204438265658).abs() < 1e-12);
    let j = (2.0 / k.group.h()).round() as usize;
    assert!((k.values[j].re - 0.033490058103098007196).abs() < 1e-12);
}

#[test]
fn hyper_trivial_cases() {
    let z = line_vector(VectorKind::Zero);
    assert_eq!(strong_factorize_vector(&z, 0.25, 0.75).unwrap().error, 0.0);
    // constant vector: the trivial representation, where everything reduces to
    // the scalar Fourier identity
    let c = line_vector(VectorKind::Constant);
    let f = strong_factorize_vector(&c, 0.25, 0.75).unwrap();
    assert!(f.sup_error <= 1e-10 && f.inversion_residual <= 1e-6, "{:e} {:e}", f.sup_error, f.inversion_residual);
}

#[test]
fn hyper_errors() {
    assert_eq!(strong_factorize_vector(lorentzian(), 0.25, 1.5).unwrap_err().code(), "GROWTH");
    assert_eq!(strong_factorize_vector(lorentzian(), 0.0, 0.75).unwrap_err().code(), "DOMAIN");
}

#[test]
fn hyper_on_circle_mode() {
    let rep = BanachRepSpec::translation(&GroupSpec::circle(256).unwrap());
    let v = RepVector::of_kind(&rep, &VectorKind::Mode { k: 3 }).unwrap();
    let f = strong_factorize_vector(&v, 0.25, 0.75).unwrap();
    assert!(f.sup_error < 1e-13, "{:e}", f.sup_error);
}

#[test]
fn factor_kernel_matches_alpha() {
    // e^{-g} = alpha_{R/2} / 2
    let g = GroupSpec::real_line(32.0, 1 << 14).unwrap();
    let p = ShiftPolicy::default();
    let a = kernel_of_symbol(&EntireSymbol::alpha(0.375), &g, &p).unwrap();
    let b = kernel_of_symbol(&EntireSymbol::erf_linear(0.75), &g, &p).unwrap();
    assert!(a.signal.scale(C::new(0.5, 0.0)).max_abs_diff(&b.signal) < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn fourier_plus_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, xi in -3.0f64..3.0, x in -2.0f64..2.0) {
        let v = lorentzian();
        let w = line_vector(VectorKind::Gaussian { a: 0.7, shift: 0.4 });
        let mut s = v.clone();
        let (fv, fw) = (v.exact.clone().unwrap(), w.exact.clone().unwrap());
        s.exact = Some(Arc::new(move |t| a * fv(t) + b * fw(t)));
        s.data = v.data.scale(C::new(a, 0.0)).add(&w.data.scale(C::new(b, 0.0)));
        let z = C::new(xi, 0.6);
        let lhs = contour_fourier_plus(&OrbitMap::new(&s), z, x, 0.25).unwrap();
        let rhs = a * contour_fourier_plus(&OrbitMap::new(v), z, x, 0.25).unwrap()
            + b * contour_fourier_plus(&OrbitMap::new(&w), z, x, 0.25).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn hyper_gaussians(a in 0.3f64..2.0, shift in -3.0f64..3.0, r in 0.3f64..1.2) {
        let v = line_vector(VectorKind::Gaussian { a, shift });
        let f = strong_factorize_vector(&v, 0.25, r).unwrap();
        prop_assert!(f.sup_error < 1e-12);
    }
}



