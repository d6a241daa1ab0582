mod common;

use bfamily_core::dynamics::RhsForm;
use bfamily_core::initial_data::Profile;
use bfamily_core::integrator::{step_rk4, step_rk4_with, theorem15_integral};
use bfamily_core::littlewood_paley::BesovSpec;
use bfamily_core::theory::remark14_lambda_min;
use bfamily_core::{simulate, Field, ParamSet, State, StepControl, TheoryConfig, Verdict};
use common::*;

fn run_fixed(s0: &State, ps: &ParamSet, t_end: f64, steps: usize) -> State {
    let dt = t_end / steps as f64;
    (0..steps).fold(s0.clone(), |s, _| {
        step_rk4(&s, ps, dt, RhsForm::Nonlocal).unwrap()
    })
}

#[test]
fn rk4_is_fourth_order_on_frozen_transport() {
    // α = β = γ = 0 freezes u, so σ solves a linear transport problem.
    let g = grid(32);
    let ps = ParamSet::constant(0.0, 0.0, 0.0, 1.0);
    let u = Field::from_fn(g, |x| 0.5 + 0.2 * x.sin());
    let s0 = State::new(u, Field::from_fn(g, |x| (2.0 * x).cos()), 0.0).unwrap();
    let reference = run_fixed(&s0, &ps, 1.0, 2560);
    let err = |steps| max_diff(&run_fixed(&s0, &ps, 1.0, steps).sigma, &reference.sigma);
    let (e1, e2) = (err(40), err(80));
    let order = (e1 / e2).log2();
    assert!(order >= 3.8, "observed order {order}");
    assert_eq!(run_fixed(&s0, &ps, 1.0, 40).u, s0.u);
}

#[test]
fn backward_step_undoes_forward_step() {
    let g = grid(64);
    let ps = ParamSet::damped_preset(2.0, 1.0, 0.3).unwrap();
    let s0 = State::new(bump(g, 0.3, 0.8, 3.0), bump(g, 0.2, 0.7, 2.0), 0.5).unwrap();
    let coeff = |t| ps.eval(t).unwrap();
    let mut errs = vec![];
    for dt in [4e-2, 2e-2] {
        let fwd = step_rk4_with(&s0, dt, RhsForm::Nonlocal, coeff).unwrap();
        let back = step_rk4_with(&fwd, -dt, RhsForm::Nonlocal, coeff).unwrap();
        assert!((back.t - s0.t).abs() < 1e-15);
        errs.push(max_diff(&back.u, &s0.u).max(max_diff(&back.sigma, &s0.sigma)));
    }
    assert!(errs[0] < 1e-6);
    assert!((errs[0] / errs[1]).log2() > 4.5, "{errs:?}");
}

#[test]
fn zero_data_stays_zero_and_keeps_norms_zero() {
    let g = grid(32);
    let r = simulate(
        &State::zeros(g),
        &ParamSet::b_family(2.0, 1.0),
        1.0,
        &StepControl::default(),
        2.0,
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Completed);
    assert!(r.series.iter().all(|s| s.hs_u == 0.0 && s.hs_sigma == 0.0));
    assert_eq!(
        theorem15_integral(&r, &ParamSet::b_family(2.0, 1.0)).unwrap(),
        0.0
    );
    assert!((r.final_time() - 1.0).abs() < 1e-12);
}

#[test]
fn strong_damping_gives_global_decay() {
    let g = grid(64);
    let u0 = bump(g, 0.1, 0.8, 3.0);
    let sigma0 = bump(g, 0.05, 0.8, 2.0);
    let cfg = TheoryConfig::default();
    let lambda = remark14_lambda_min(&u0, &sigma0, BesovSpec::sobolev(2.0), 2.0, 1.0, &cfg);
    assert!(lambda.is_finite() && lambda > 0.0);
    let ps = ParamSet::damped_preset(2.0, 1.0, lambda).unwrap();
    let ctrl = StepControl {
        output_interval: 1.0,
        ..StepControl::default()
    };
    let r = simulate(&State::new(u0, sigma0, 0.0).unwrap(), &ps, 10.0, &ctrl, 2.0).unwrap();
    assert_eq!(r.verdict, Verdict::Completed);
    let h0 = r.series[0].hs_u;
    assert!(r.series.iter().all(|s| s.hs_u <= 1.01 * h0));
}

#[test]
fn steepening_sine_is_flagged_as_blow_up() {
    let g = grid(256);
    let u0 = Profile::Sine {
        amplitude: -5.0,
        wavenumber: 1.0,
    }
    .sample(g)
    .unwrap();
    let ps = ParamSet::constant(1.0, 3.0, 0.0, 0.0);
    let ctrl = StepControl {
        output_interval: 0.0,
        ..StepControl::default()
    };
    let r = simulate(
        &State::new(u0, Field::zeros(g), 0.0).unwrap(),
        &ps,
        2.0,
        &ctrl,
        2.0,
    )
    .unwrap();
    let t = r.verdict.blowup_time().expect("blow-up expected");
    assert!(t > 0.0 && t < 0.5);
    let resolved: Vec<f64> = r
        .series
        .iter()
        .filter(|s| s.is_resolved())
        .map(|s| s.inf_ux)
        .collect();
    assert!(resolved.len() > 10);
    assert!(resolved.windows(2).all(|w| w[1] <= w[0] + 1e-9));
}

#[test]
fn zero_sigma_is_preserved() {
    let g = grid(64);
    let ps = ParamSet::constant(1.0, 2.0, 1.0, 1.0);
    let r = simulate(
        &State::new(bump(g, 0.4, 0.8, 3.0), Field::zeros(g), 0.0).unwrap(),
        &ps,
        1.0,
        &StepControl::default(),
        2.0,
    )
    .unwrap();
    assert!(r.frames.iter().all(|f| f.sigma.max_abs() <= 1e-13));
}

#[test]
fn resolution_and_step_refinement_converge() {
    let ps = ParamSet::constant(1.0, 2.0, 1.0, 1.0);
    let run = |n, dt| {
        let g = grid(n);
        let ctrl = StepControl {
            dt_init: dt,
            output_interval: 0.5,
            ..StepControl::default()
        };
        let s0 = State::new(bump(g, 0.3, 0.8, 3.0), bump(g, 0.2, 0.8, 2.0), 0.0).unwrap();
        simulate(&s0, &ps, 1.0, &ctrl, 2.0)
            .unwrap()
            .last_frame()
            .clone()
    };
    let coarse = run(64, 1e-2);
    let fine = run(128, 1e-2);
    // compare on the shared points
    let sub: Vec<f64> = fine.u.values().iter().step_by(2).copied().collect();
    let sub = Field::new(coarse.grid(), sub).unwrap();
    assert!(max_diff(&sub, &coarse.u) < 1e-8);
    let half = run(64, 5e-3);
    let quarter = run(64, 2.5e-3);
    let (e1, e2) = (
        max_diff(&coarse.u, &quarter.u),
        max_diff(&half.u, &quarter.u),
    );
    assert!(e1 < 1e-7 && e2 < e1);
}
