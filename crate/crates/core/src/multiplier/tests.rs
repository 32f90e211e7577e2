use super::*;
use crate::certificate::{Rule, Verdict};
use crate::symbols::EntireSymbol;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

type C = Complex64;

fn line() -> &'static GroupSpec {
    static G: OnceLock<GroupSpec> = OnceLock::new();
    G.get_or_init(GroupSpec::default_line)
}

fn small_line() -> GroupSpec {
    GroupSpec::real_line(32.0, 1 << 12).unwrap()
}

fn value_at(s: &SampledSignal, x: f64) -> C {
    let j = (0..s.group.len()).find(|&j| (s.group.coord(j) - x).abs() < 1e-9).expect("grid point");
    s.values[j]
}

fn kernel(f: &EntireSymbol) -> Kernel {
    kernel_of_symbol(f, line(), &ShiftPolicy::default()).unwrap()
}

#[test]
fn grid_validation() {
    assert_eq!(GroupSpec::real_line(10.0, 1000).unwrap_err().code(), "CONFIG");
    assert_eq!(GroupSpec::circle(1).unwrap_err().code(), "CONFIG");
    let g = GroupSpec::real_line(8.0, 16).unwrap();
    assert_eq!(g.h(), 1.0);
    assert_eq!(g.coord(15), -1.0);
    assert_eq!(g.inverse_index(3), 13);
    assert_eq!(SampledSignal::new(&g, vec![C::new(0.0, 0.0); 3]).unwrap_err().code(), "GRID_MISMATCH");
}

#[test]
fn heat_kernel_closed_form() {
    let k = heat_kernel(line()).unwrap();
    assert!((k.signal.values[0].re - 0.28209479177387814).abs() < 1e-15);
    let mut err: f64 = 0.0;
    for j in 0..line().len() {
        let x = line().coord(j);
        let exact = (-x * x / 4.0).exp() / (2.0 * PI.sqrt());
        err = err.max((k.signal.values[j].re - exact).abs());
    }
    assert!(err < 1e-15, "{err:e}");
    assert!((k.mass - 1.0).abs() < 1e-12);
    assert!(k.symmetric);
}

#[test]
fn alpha_kernel_against_quadrature() {
    // real-axis and shifted-contour quadrature at 30 digits
    let k = kernel(&EntireSymbol::alpha(0.25));
    for (x, v, tol) in [
        (0.0, 2.5803849520280946698, 1e-13),
        (1.0, 0.17372180230396153125, 1e-13),
        (5.0, 0.00056922173161593017251, 1e-14),
        (14.0, 1.0536373977560689181e-10, 1e-17),
    ] {
        let got = value_at(&k.signal, x).re;
        assert!((got - v).abs() < tol, "x = {x}: {got:e} vs {v:e}");
    }
    assert!((k.mass - 2.0).abs() < 1e-10);
    assert!(k.symmetric);
    let k = kernel(&EntireSymbol::alpha(0.1));
    assert!((value_at(&k.signal, 0.0).re - 6.3811045547601539477).abs() < 1e-12);
    let v = value_at(&k.signal, 20.0).re;
    assert!((v - 1.1280700775148731904e-17).abs() < 1e-21, "{v:e}");
}

#[test]
fn contour_and_fft_agree_on_overlap() {
    for f in [EntireSymbol::alpha(0.25), EntireSymbol::alpha(0.1), EntireSymbol::heat(), EntireSymbol::beta(0.5)] {
        let k = kernel(&f);
        let r = k.overlap_residual.expect("overlap computed");
        assert!(r < 1e-9, "{}: {r:e}", f.name());
        assert!(k.symmetric, "{}", f.name());
    }
}

#[test]
fn lorentzian_is_unresolved_but_has_a_known_kernel() {
    let f = EntireSymbol::lorentzian();
    assert_eq!(kernel_of_symbol(&f, line(), &ShiftPolicy::default()).unwrap_err().code(), "RESOLUTION");
    let p = ShiftPolicy { allow_unresolved: true, ..Default::default() };
    let k = kernel_of_symbol(&f, line(), &p).unwrap();
    // aliasing of the 1/xi^2 tail beyond nyquist
    let err = (value_at(&k.signal, 1.0).re - 0.5 * (-1.0f64).exp()).abs();
    assert!(err < 1e-6 && err > 1e-13, "{err:e}");
}

#[test]
fn odd_symbol_is_rejected() {
    let f = EntireSymbol::custom("odd", Arc::new(|z: C| z * (-z * z).exp()), true);
    assert_eq!(kernel_of_symbol(&f, line(), &ShiftPolicy::default()).unwrap_err().code(), "NOT_EVEN");
}

#[test]
fn alpha_kernel_certificate_all_weights() {
    let k = kernel(&EntireSymbol::alpha(0.1));
    let c = decay_certificate_kernel(&k, &[1.0, 2.0, 3.0, 4.0], 8.0);
    assert_eq!(c.verdict, Verdict::Finite);
    for e in &c.entries {
        assert!(e.ln_contour_bound.unwrap() >= e.ln_sup);
    }
}

#[test]
fn lorentzian_control_certificate() {
    let g = line();
    let s = SampledSignal::from_fn(g, |x| 0.5 * (-x.abs()).exp());
    let f = EntireSymbol::lorentzian();
    let bound = |n: f64| contour_bound_ln(&f, n);
    let c = decay_certificate_signal(&s, &[0.99, 2.0], 32.0, "exact lorentzian kernel", &bound);
    assert_eq!(c.entry(0.99).unwrap().verdict, Verdict::Finite);
    let e2 = c.entry(2.0).unwrap();
    assert_eq!(e2.verdict, Verdict::Inconclusive);
    assert!(e2.ln_contour_bound.is_none());
    assert!(e2.ln_shell_growth > 7.0);
    assert_eq!(c.verdict, Verdict::Inconclusive);
}

#[test]
fn heat_kernel_certificate() {
    let k = heat_kernel(line()).unwrap();
    let c = decay_certificate_kernel(&k, &[1.0, 3.0, 6.0], 10.0);
    assert_eq!(c.verdict, Verdict::Finite);
    assert_eq!(c.entries[0].rule, Rule::ShellStable);
}

#[test]
fn contour_bound_of_heat_is_closed_form() {
    // (2 pi)^{-1} int e^{-(xi^2 - n^2)} = e^{n^2} / (2 sqrt(pi))
    for n in [0.0, 1.0, 3.0] {
        let b = contour_bound_ln(&EntireSymbol::heat(), n).unwrap();
        let exact = n * n - (2.0 * PI.sqrt()).ln();
        assert!((b - exact).abs() < 1e-12, "{n}: {b} vs {exact}");
    }
    assert!(contour_bound_ln(&EntireSymbol::lorentzian(), 1.5).is_none());
    assert!(contour_bound_ln(&EntireSymbol::cosh(1.0), 0.5).is_none());
}

#[test]
fn gaussian_self_convolution() {
    let g = line();
    let phi = SampledSignal::from_fn(g, |x| (-x * x).exp());
    let c = convolve(&phi, &phi).unwrap();
    let exact = SampledSignal::from_fn(g, |x| (PI / 2.0).sqrt() * (-x * x / 2.0).exp());
    assert!(c.max_abs_diff(&exact) < 1e-14);
}

#[test]
fn convolution_with_narrow_gaussian_approximates_identity() {
    let g = line();
    let phi = SampledSignal::from_fn(g, |x| (-x * x / 2.0).exp());
    let mut last = f64::INFINITY;
    for w in [0.2, 0.1, 0.05] {
        let d = SampledSignal::from_fn(g, |x| (-x * x / (2.0 * w * w)).exp() / (w * (2.0 * PI).sqrt()));
        let e = convolve(&phi, &d).unwrap().max_abs_diff(&phi);
        // second-order in the width
        assert!(e < 0.6 * w * w && e < last);
        last = e;
    }
}

#[test]
fn heat_kernels_compose() {
    let k = kernel(&EntireSymbol::heat());
    let kk = convolve(&k.signal, &k.signal).unwrap();
    let two = EntireSymbol::custom("exp_minus_2z2", Arc::new(|z: C| (-2.0 * z * z).exp()), true);
    let oracle = kernel(&two);
    assert!(kk.max_abs_diff(&oracle.signal) < 1e-10);
}

#[test]
fn wraparound_guard() {
    let g = small_line();
    let wide = SampledSignal::from_fn(&g, |x| (-x.abs() / 4.0).exp());
    let narrow = SampledSignal::from_fn(&g, |x| (-x * x).exp());
    assert_eq!(convolve(&wide, &narrow).unwrap_err().code(), "WRAPAROUND");
    let other = GroupSpec::real_line(16.0, 1 << 12).unwrap();
    let n2 = SampledSignal::from_fn(&other, |x| (-x * x).exp());
    assert_eq!(convolve(&narrow, &n2).unwrap_err().code(), "GRID_MISMATCH");
}

#[test]
fn circle_heat_on_a_mode() {
    let g = GroupSpec::circle(64).unwrap();
    let v = SampledSignal::from_cfn(&g, |t| C::from_polar(1.0, t));
    let out = apply_multiplier(&EntireSymbol::heat(), &v).unwrap();
    assert!(out.max_abs_diff(&v.scale(C::new((-1.0f64).exp(), 0.0))) < 1e-15);
}

#[test]
fn cosh_on_pure_modes() {
    let g = GroupSpec::circle(64).unwrap();
    for k in [0i32, 2, 7, -5] {
        let v = SampledSignal::from_cfn(&g, |t| C::from_polar(1.0, k as f64 * t));
        let out = apply_multiplier(&EntireSymbol::cosh(0.5), &v).unwrap();
        let want = v.scale(C::new((0.5 * k.abs() as f64).cosh(), 0.0));
        assert!(out.max_abs_diff(&want) < 1e-13 * want.sup_norm(), "k = {k}");
    }
}

#[test]
fn growing_symbol_needs_compensating_decay() {
    let g = line();
    // spectrum pi e^{-|xi|} does not beat cosh(2 xi)
    let v = SampledSignal::from_fn(g, |x| 1.0 / (1.0 + x * x));
    let v = v.mul(&SampledSignal::from_fn(g, |x| (-x * x / 1e3).exp()));
    assert_eq!(apply_multiplier(&EntireSymbol::cosh(2.0), &v).unwrap_err().code(), "UNBOUNDED");
    // a Gaussian does
    let w = SampledSignal::from_fn(g, |x| (-x * x).exp());
    let out = apply_multiplier_detail(&EntireSymbol::cosh(0.5), &w, &MultiplierOpts::default()).unwrap();
    // average of e^{-(x +- i/2)^2}
    let exact = SampledSignal::from_fn(g, |x| (0.25f64).exp() * (-x * x).exp() * x.cos());
    let e = out.signal.max_abs_diff(&exact);
    assert!(e < 1e-12, "{e:e}");
    assert!(out.truncated_modes > 0);
}

#[test]
fn unresolved_input_is_rejected() {
    let g = GroupSpec::real_line(8.0, 64).unwrap();
    let v = SampledSignal::from_fn(&g, |x| (-x.abs()).exp());
    assert_eq!(apply_multiplier(&EntireSymbol::heat(), &v).unwrap_err().code(), "RESOLUTION");
}

#[test]
fn multiplier_of_zero_is_zero() {
    let z = SampledSignal::zeros(line());
    for f in [EntireSymbol::heat(), EntireSymbol::cosh(3.0), EntireSymbol::alpha(0.5)] {
        assert_eq!(apply_multiplier(&f, &z).unwrap().sup_norm(), 0.0);
    }
}

#[test]
fn wave_crosscheck_heat_and_alpha() {
    let r = wave_crosscheck(&EntireSymbol::heat(), &[0, 1, -1, 3]).unwrap();
    assert!(r[0].residual <= 1e-10);
    assert_eq!(r[1].residual, r[2].residual);
    let modes: Vec<i64> = (0..=10).collect();
    for w in wave_crosscheck(&EntireSymbol::alpha(0.5), &modes).unwrap() {
        assert!(w.residual <= 1e-8, "k = {}: {:e}", w.k, w.residual);
    }
    assert_eq!(wave_crosscheck(&EntireSymbol::cosh(1.0), &[0]).unwrap_err().code(), "DECAY");
}

#[test]
fn circle_heat_kernel_is_positive_with_unit_mass() {
    for m in [32, 256] {
        let k = heat_kernel(&GroupSpec::circle(m).unwrap()).unwrap();
        assert!(k.signal.values.iter().all(|v| v.re > 0.0));
        assert!((k.mass - 1.0).abs() < 1e-14);
    }
}

#[test]
fn regularized_distance_on_the_line() {
    let g = line();
    let d = regularized_distance(g).unwrap();
    let d0 = value_at(&d.signal, 0.0).re;
    assert!((d0 - 1.1283791670955126).abs() < 1e-13);
    // x erf(x/2) + (2/sqrt(pi)) e^{-x^2/4}
    let mut err: f64 = 0.0;
    for j in 0..g.len() {
        let x = g.coord(j);
        if x.abs() <= 50.0 {
            let exact = x * crate::symbols::erf(C::new(x / 2.0, 0.0)).re + 2.0 / PI.sqrt() * (-x * x / 4.0).exp();
            err = err.max((d.signal.values[j].re - exact).abs());
        }
    }
    assert!(err < 1e-12, "{err:e}");
    let d20 = value_at(&d.signal, 20.0).re;
    assert!((d20 - 20.0).abs() <= d0);
    assert!((d.sup_defect - d0).abs() < 1e-13);
    assert_eq!(d.argmax, 0.0);
}

#[test]
fn regularized_distance_on_the_circle() {
    let g = GroupSpec::circle(256).unwrap();
    let d = regularized_distance(&g).unwrap();
    // pi/2 - (4/pi) sum_{k odd} e^{-k^2} cos(k t) / k^2
    for (t, v) in
        [(0.0, 1.1023802156837725621), (1.0, 1.317736739144153669), (2.0, 1.7657021806169494362), (3.0, 2.0345233852323863804)]
    {
        let j = (0..g.len()).min_by(|&a, &b| (g.coord(a) - t).abs().total_cmp(&(g.coord(b) - t).abs())).unwrap();
        if (g.coord(j) - t).abs() < 1e-12 {
            assert!((d.signal.values[j].re - v).abs() < 1e-13, "t = {t}");
        }
    }
    let t = g.coord(81);
    let series: f64 = PI / 2.0
        - 4.0 / PI * (0..20).map(|i| 2 * i + 1).map(|k| (-((k * k) as f64)).exp() * (k as f64 * t).cos() / (k * k) as f64).sum::<f64>();
    assert!((d.signal.values[81].re - series).abs() < 1e-13);
}

#[test]
fn cutoff_values() {
    let g = line();
    let chi = cutoff_chi(1.0, g).unwrap();
    assert!((chi.values[0].re - 0.27992332720139052547).abs() < 1e-13);
    assert!(chi.values.iter().all(|v| v.re >= 0.0 && v.re <= 1.0));
    assert!((0..g.len()).filter(|&j| g.dist(j) < 25.0).all(|j| chi.values[j].re > 0.0));
    assert_eq!(cutoff_chi(0.0, g).unwrap_err().code(), "DOMAIN");
    let d = regularized_distance(g).unwrap().signal;
    let mut prev = chi_from_distance(1.0, &d);
    for delta in [0.1, 1e-3, 1e-6] {
        let c = chi_from_distance(delta, &d);
        assert!(c.values.iter().zip(&prev.values).all(|(a, b)| a.re >= b.re));
        prev = c;
    }
    assert!((0..g.len()).filter(|&j| g.dist(j) <= 20.0).all(|j| (prev.values[j].re - 1.0).abs() < 1e-3));
}

fn gaussian_bump(a: f64, s: f64) -> impl Fn(f64) -> f64 {
    move |x| a * (-(x - s) * (x - s)).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernels_are_real_and_even(eps in 0.2f64..0.7) {
        let g = small_line();
        for f in [EntireSymbol::alpha(eps), EntireSymbol::beta(eps)] {
            let k = kernel_of_symbol(&f, &g, &ShiftPolicy::default()).unwrap();
            prop_assert!(k.symmetric);
            prop_assert!(k.edge_ratio < 1e-12, "{} {:e}", f.name(), k.edge_ratio);
            prop_assert!((k.mass - k.symbol_at_zero.re).abs() < 1e-10 * k.symbol_at_zero.norm().max(1.0));
        }
    }

    #[test]
    fn fourier_homomorphism(e1 in 0.2f64..0.7, e2 in 0.4f64..1.0) {
        let g = small_line();
        let (f1, f2) = (EntireSymbol::alpha(e1), EntireSymbol::erf_linear(e2));
        let p = ShiftPolicy::default();
        let k1 = kernel_of_symbol(&f1, &g, &p).unwrap();
        let k2 = kernel_of_symbol(&f2, &g, &p).unwrap();
        let k12 = kernel_of_symbol(&EntireSymbol::product(&f1, &f2), &g, &p).unwrap();
        let c = convolve(&k1.signal, &k2.signal).unwrap();
        prop_assert!(c.max_abs_diff(&k12.signal) < 1e-9);
    }

    #[test]
    fn convolution_is_associative(s1 in -3.0f64..3.0, s2 in -3.0f64..3.0, a in 0.5f64..2.0) {
        let g = small_line();
        let p = SampledSignal::from_fn(&g, gaussian_bump(a, s1));
        let q = SampledSignal::from_fn(&g, gaussian_bump(1.0, s2));
        let r = SampledSignal::from_fn(&g, |x| (-x * x / 2.0).exp() * (1.0 + x * x));
        let left = convolve(&convolve(&p, &q).unwrap(), &r).unwrap();
        let right = convolve(&p, &convolve(&q, &r).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-10 * left.sup_norm().max(1.0));
    }

    #[test]
    fn multipliers_compose(e1 in 0.1f64..1.0, e2 in 0.1f64..0.6, s in -4.0f64..4.0) {
        let g = small_line();
        let v = SampledSignal::from_fn(&g, gaussian_bump(1.0, s));
        let (f1, f2) = (EntireSymbol::alpha(e1), EntireSymbol::cosh(e2));
        let lhs = apply_multiplier(&f1, &apply_multiplier(&f2, &v).unwrap()).unwrap();
        let rhs = apply_multiplier(&EntireSymbol::product(&f1, &f2), &v).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}
