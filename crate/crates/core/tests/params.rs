mod common;

use bfamily_core::params::{adaptive_simpson, sign_check, ParamFn, ParamSet};
use common::simpson;

#[test]
fn closed_form_masses_match_quadrature() {
    let cases = [
        ParamFn::constant(-1.5),
        ParamFn::damped_exp(2.0, 0.7).unwrap(),
        ParamFn::damped_exp(-0.5, 0.1).unwrap(),
        ParamFn::tabulated(vec![0.0, 0.5, 1.5, 2.0], vec![1.0, -2.0, 0.5, 0.0]).unwrap(),
    ];
    for f in &cases {
        for t in [0.3, 1.0, 1.7, 4.0] {
            let quad = simpson(|s| f.eval(s).unwrap().abs(), 0.0, t, 20000);
            let m = f.l1_mass(t).unwrap();
            assert!((m - quad).abs() < 1e-6, "{f:?} at {t}: {m} vs {quad}");
        }
    }
}

#[test]
fn tabulated_triangle_has_unit_area() {
    let f = ParamFn::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
    assert!((f.l1_mass(f64::INFINITY).unwrap() - 1.0).abs() < 1e-10);
    assert!((f.l1_mass(1.0).unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn damped_mass_formula() {
    for (s, l) in [(1.0, 0.5), (-3.0, 2.0), (0.25, 0.01)] {
        let f = ParamFn::damped_exp(s, l).unwrap();
        for t in [0.0, 0.1, 1.0, 10.0] {
            let expect = f64::abs(s) * (1.0 - (-2.0 * l * t).exp()) / (2.0 * l);
            assert!((f.l1_mass(t).unwrap() - expect).abs() <= 1e-12 * expect.max(1.0));
        }
        assert!((f.l1_mass(f64::INFINITY).unwrap() - s.abs() / (2.0 * l)).abs() < 1e-12);
    }
}

#[test]
fn mass_is_monotone_in_time() {
    let f = ParamFn::tabulated(vec![0.0, 1.0, 3.0], vec![2.0, -1.0, 0.5]).unwrap();
    let mut prev = 0.0;
    for i in 0..=50 {
        let m = f.l1_mass(i as f64 * 0.1).unwrap();
        assert!(m >= prev - 1e-15);
        prev = m;
    }
}

#[test]
fn adaptive_simpson_integrates_smooth_functions() {
    let v = adaptive_simpson(&|t: f64| t.sin(), 0.0, std::f64::consts::PI, 1e-12);
    assert!((v - 2.0).abs() < 1e-10);
}

#[test]
fn sign_condition_examples() {
    let c = |a, g, x| ParamSet::constant(a, 3.0 * a, g, x);
    assert!(
        sign_check(&ParamSet::damped_preset(2.0, 1.0, 0.5).unwrap(), 5.0, 50)
            .unwrap()
            .satisfied
    );
    assert!(!sign_check(&c(-1.0, 0.0, 0.0), 5.0, 50).unwrap().satisfied);
    assert!(sign_check(&c(-1.0, 0.5, 0.6), 5.0, 50).unwrap().satisfied);
}
