mod common;

use std::f64::consts::PI;

use bfamily_core::littlewood_paley::{
    besov_norm, decompose, fit_low_pass_constant, low_pass, moser_ratio, sobolev_norm, BesovSpec,
};
use bfamily_core::Field;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn single_mode_besov_norms() {
    let g = grid(64);
    let f = Field::from_fn(g, |x| (4.0 * x).sin());
    for s in [0.5, 1.0, 2.0, 3.5] {
        for r in [1.0, 2.0, f64::INFINITY] {
            let expect = 2f64.powf(2.0 * s) * PI.sqrt();
            let got = besov_norm(&f, BesovSpec::new(s, 2.0, r).unwrap());
            assert!((got - expect).abs() < 1e-12 * expect);
        }
        let sup = besov_norm(&f, BesovSpec::new(s, f64::INFINITY, 2.0).unwrap());
        assert!((sup - 2f64.powf(2.0 * s)).abs() < 1e-9 * sup);
    }
    let h = Field::from_fn(g, |x| (2.0 * x).sin());
    assert!((sobolev_norm(&h, 1.5) - (PI * 5f64.powf(1.5)).sqrt()).abs() < 1e-12);
}

#[test]
fn blocks_reconstruct_and_low_pass_sums_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = grid(128);
    let f = band_limited(g, 60, &mut rng);
    let d = decompose(&f);
    assert!(max_diff(&d.reconstruct(), &f) < 1e-13);
    for q in 1..=d.q_max() {
        let partial = (-1..q).fold(Field::zeros(g), |acc, p| acc.add(d.block(p).unwrap()));
        assert!(max_diff(&low_pass(&f, q).unwrap(), &partial) < 1e-13);
    }
    assert!(d.block(0).unwrap().max_abs() < 1e-15);
}

#[test]
fn besov_two_two_is_equivalent_to_sobolev() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = grid(256);
    for _ in 0..10 {
        let f = band_limited(g, 80, &mut rng);
        for s in [0.5, 1.0, 2.0, 3.0] {
            let b = besov_norm(&f, BesovSpec::sobolev(s));
            let h = sobolev_norm(&f, s);
            assert!(b <= h * (1.0 + 1e-12));
            assert!(h <= 8f64.powf(0.5 * s) * b);
        }
    }
}

#[test]
fn moser_ratio_is_resolution_independent_on_band_limited_products() {
    let corpus = |n: usize| -> Vec<(Field, Field)> {
        let g = grid(n);
        (0..5u64)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(k);
                (band_limited(g, 10, &mut rng), band_limited(g, 10, &mut rng))
            })
            .collect()
    };
    let ratios = |n| -> Vec<f64> {
        corpus(n)
            .iter()
            .map(|(f, h)| moser_ratio(f, h, 2.0, 1.0, 2.0, 2.0).unwrap())
            .collect()
    };
    let (a, b) = (ratios(64), ratios(256));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10 * x);
        assert!(x.is_finite() && *x > 0.0);
    }
}

#[test]
fn low_pass_constant_is_stable_under_refinement() {
    let fit = |n| {
        let g = grid(n);
        let corpus: Vec<Field> = (0..4u64)
            .map(|k| bump(g, 1.0, 0.3 + 0.1 * k as f64, 1.0 + k as f64))
            .collect();
        fit_low_pass_constant(&corpus, 2.0, 4).unwrap()
    };
    let (a, b) = (fit(128), fit(512));
    assert!((a - b).abs() < 1e-3 * b, "{a} vs {b}");
}
