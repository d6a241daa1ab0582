mod common;

use bfamily_core::friedrichs::{
    cauchy_differences, iterate, linear_transport_solve, output_times, FieldSeries, IterateRecord,
};
use bfamily_core::initial_data::Profile;
use bfamily_core::littlewood_paley::BesovSpec;
use bfamily_core::params::ParamFn;
use bfamily_core::theory::{data_norm, lemma32_bound};
use bfamily_core::{Field, ParamSet};
use common::*;

#[test]
fn constant_advection_translates() {
    let g = grid(64);
    let times = output_times(2.0, 40);
    let adv = FieldSeries::constant(&times, Field::constant(g, 1.0));
    let zero = FieldSeries::constant(&times, Field::zeros(g));
    let f0 = Field::from_fn(g, |x| x.sin() + 0.5 * (3.0 * x).cos());
    let out = linear_transport_solve(&adv, &ParamFn::constant(0.5), &zero, &f0, 2.0).unwrap();
    for (t, f) in out.times.iter().zip(&out.fields) {
        let exact = Field::from_fn(g, |x| {
            (x - 0.5 * t).sin() + 0.5 * (3.0 * (x - 0.5 * t)).cos()
        });
        assert!(
            max_diff(f, &exact) < 1e-6,
            "t = {t}: {}",
            max_diff(f, &exact)
        );
    }
}

#[test]
fn unforced_transport_does_not_grow_sup_norm() {
    let g = grid(128);
    let times = output_times(1.0, 50);
    let adv = FieldSeries::constant(&times, Field::from_fn(g, |x| 0.3 + 0.5 * x.sin()));
    let zero = FieldSeries::constant(&times, Field::zeros(g));
    let f0 = bump(g, 1.0, 0.7, 3.0);
    let out = linear_transport_solve(&adv, &ParamFn::constant(1.0), &zero, &f0, 1.0).unwrap();
    for f in &out.fields {
        // the sampled maximum of `f0` sits below the true peak of 1
        assert!(f.max_abs() <= 1.0 + 1e-6, "{}", f.max_abs());
    }
}

fn small_problem() -> (Field, Field, ParamSet, Vec<IterateRecord>) {
    let g = grid(128);
    let band = |seed, amplitude| {
        Profile::RandomBand {
            amplitude,
            kmax: 40,
            decay: 3.0,
            seed,
        }
        .sample(g)
        .unwrap()
    };
    let u0 = band(0, 0.1);
    let sigma0 = band(1, 0.1);
    let p = |s| ParamFn::damped_exp(s, 0.5).unwrap();
    let ps = ParamSet::new(p(0.05), p(0.1), p(0.05), p(0.05));
    let recs = iterate(&u0, &sigma0, &ps, BesovSpec::sobolev(2.0), 1.0, 9, 40).unwrap();
    (u0, sigma0, ps, recs)
}

#[test]
fn iterates_stabilize_and_start_below_the_data_norm() {
    let (u0, sigma0, _, recs) = small_problem();
    let h0 = data_norm(&u0, &sigma0, BesovSpec::sobolev(2.0));
    for r in &recs {
        assert!(r.h_series[0] <= h0 * (1.0 + 1e-12));
        assert!(r.sup_h() <= 2.0 * h0);
    }
    let d = cauchy_differences(&recs, 1).unwrap();
    assert_eq!(d.len(), 8);
    assert!(d[7] <= 1e-3 * d[0], "{d:?}");
    let last = &recs[recs.len() - 1];
    let prev = &recs[recs.len() - 2];
    assert!((last.sup_h() - prev.sup_h()).abs() < 1e-4 * last.sup_h());
}

#[test]
fn cauchy_differences_obey_the_recursive_bound() {
    let (_, _, ps, recs) = small_problem();
    for m in [1, 2] {
        let d = cauchy_differences(&recs, m).unwrap();
        let g0 = d[0];
        let c = d[1];
        let a: Vec<f64> = (0..d.len()).map(|k| c * 0.5f64.powi(k as i32)).collect();
        let mass = ps.total_mass(f64::INFINITY).unwrap();
        for (n, dn) in d.iter().enumerate().skip(2) {
            let bound = lemma32_bound(&a, mass, g0, n - 1).unwrap();
            assert!(*dn <= bound, "m = {m}, n = {n}: {dn} > {bound}");
        }
    }
}

#[test]
fn index_errors() {
    let (_, _, _, recs) = small_problem();
    assert!(cauchy_differences(&recs, 0).is_err());
    assert!(cauchy_differences(&recs, recs.len()).is_err());
}
