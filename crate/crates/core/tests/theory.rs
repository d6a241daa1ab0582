mod common;

use std::f64::consts::{LN_2, PI};

use bfamily_core::littlewood_paley::BesovSpec;
use bfamily_core::params::ParamFn;
use bfamily_core::theory::{
    blowup_lower_bound, data_norm, h_modulus, l_of_t, l_of_t_running, lemma32_bound,
    lemma41_bounds, remark14_lambda_min, theorem11_check,
};
use bfamily_core::{simulate, Field, ParamSet, State, StepControl, TheoryConfig};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn damped(scale: f64) -> ParamFn {
    ParamFn::damped_exp(scale, 0.5).unwrap()
}

#[test]
fn h_modulus_from_masses() {
    // masses: α = ξ = 0.05, β = 0.1, γ = 0
    let ps = ParamSet::new(damped(0.05), damped(0.1), ParamFn::zero(), damped(0.05));
    let h = h_modulus(1.0, &ps, &TheoryConfig::default()).unwrap();
    assert!((h - 1.8 * 0.2f64.exp()).abs() < 1e-12);
}

#[test]
fn theorem11_ratio_matches_direct_evaluation() {
    let g = grid(64);
    let u0 = Field::from_fn(g, |x| 0.01 * (4.0 * x).sin());
    let z = Field::zeros(g);
    let spec = BesovSpec::sobolev(2.0);
    let h0 = 0.01 * 16.0 * PI.sqrt();
    assert!((data_norm(&u0, &z, spec) - h0).abs() < 1e-14);
    let cfg = TheoryConfig::default();
    let mut prev = 0.0;
    for theta in [0.1, 1.0, 10.0] {
        let ps =
            ParamSet::new(damped(0.05), damped(0.1), ParamFn::zero(), damped(0.05)).scaled(theta);
        let all = 0.2 * theta;
        let h = (2.0 * h0 * 0.1 * theta).exp() * (h0 + 4.0 * h0 * h0 * all);
        let rhs = LN_2 / (6.0 * h);
        let chk = theorem11_check(&u0, &z, spec, &ps, &cfg).unwrap();
        assert!((chk.ratio - all / rhs).abs() < 1e-12 * chk.ratio);
        assert_eq!(chk.satisfied, all <= rhs);
        assert!(chk.ratio > prev);
        prev = chk.ratio;
    }
    let p_inf = BesovSpec::new(2.0, f64::INFINITY, 2.0).unwrap();
    assert!(theorem11_check(
        &u0,
        &z,
        BesovSpec::sobolev(1.5),
        &ParamSet::constant(0.0, 0.0, 0.0, 0.0),
        &cfg
    )
    .is_err());
    assert!(
        theorem11_check(
            &u0,
            &z,
            p_inf,
            &ParamSet::constant(0.0, 0.0, 0.0, 0.0),
            &cfg
        )
        .unwrap()
        .satisfied
    );
}

#[test]
fn lambda_min_for_single_mode() {
    let g = grid(64);
    let u0 = Field::from_fn(g, |x| (4.0 * x).sin());
    let lam = remark14_lambda_min(
        &u0,
        &Field::zeros(g),
        BesovSpec::sobolev(2.0),
        2.0,
        1.0,
        &TheoryConfig::default(),
    );
    assert!((lam - 8.0 * 5.0 * 16.0 * PI.sqrt() / LN_2).abs() < 1e-10);
}

#[test]
fn blowup_lower_bound_sixth() {
    let g = grid(64);
    let u0 = Field::from_fn(g, |x| x.sin() / PI.sqrt());
    let ps = ParamSet::constant(1.0, 0.0, 1.0, 1.0);
    let b = blowup_lower_bound(&u0, &Field::zeros(g), 2.0, &ps, &TheoryConfig::default()).unwrap();
    assert!(!b.global);
    assert!((b.threshold - 0.5).abs() < 1e-13);
    assert!((b.time - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn lemma32_matches_unrolled_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..50 {
        let n = rng.gen_range(0..15);
        let a: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let mass = rng.gen_range(0.0..4.0);
        let g0 = rng.gen_range(0.0..2.0);
        let got = lemma32_bound(&a, mass, g0, n).unwrap();
        let want = unrolled_recursion(&a, mass, g0, n);
        assert!((got - want).abs() <= 1e-12 * want.max(1.0), "n = {n}");
    }
}

fn three_alpha_run() -> (bfamily_core::SimResult, ParamSet) {
    let g = grid(128);
    let ps = ParamSet::new(damped(1.0), damped(3.0), damped(0.5), damped(1.0));
    let s0 = State::new(bump(g, 0.3, 0.8, 3.0), bump(g, 0.2, 0.8, 2.0), 0.0).unwrap();
    let ctrl = StepControl {
        output_interval: 0.0,
        ..StepControl::default()
    };
    (simulate(&s0, &ps, 2.0, &ctrl, 2.0).unwrap(), ps)
}

#[test]
fn lemma41_bounds_hold() {
    let (r, ps) = three_alpha_run();
    let (l2, linf) = lemma41_bounds(&r, &ps, 2.0).unwrap();
    assert!(l2.satisfied && linf.satisfied);
    assert!(l2.margin >= 1.0 && linf.margin >= 1.0);
    assert!(lemma41_bounds(&r, &ParamSet::b_family(2.0, 1.0), 2.0).is_err());
}

#[test]
fn l_functional_is_monotone() {
    let (r, ps) = three_alpha_run();
    let l0 = l_of_t(&r, &ps, 2.0, 0.0).unwrap();
    let l1 = l_of_t(&r, &ps, 2.0, 1.0).unwrap();
    let running = l_of_t_running(&r, &ps, 2.0).unwrap();
    assert_eq!(l0[0], 0.0);
    assert!(l0.windows(2).all(|w| w[1] >= w[0]));
    for ((a, b), c) in l0.iter().zip(&l1).zip(&running) {
        assert!(b >= a && c >= a);
    }
    assert!(l_of_t(&r, &ps, 2.0, -1.0).is_err());
}
