mod common;

use bfamily_core::spectral::{self, Field};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn derivative_and_helmholtz_identities_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [32, 64, 128] {
        let g = grid(n);
        for _ in 0..10 {
            let f = band_limited(g, n / 4, &mut rng);
            for shift in [1.0, 4.0] {
                let back =
                    spectral::helmholtz(&spectral::helmholtz_inverse(&f, shift).unwrap(), shift);
                assert!(max_diff(&back, &f) < 1e-10);
            }
            let a = spectral::derivative(&spectral::helmholtz_inverse(&f, 1.0).unwrap());
            let b = spectral::helmholtz_inverse(&spectral::derivative(&f), 1.0).unwrap();
            assert!(max_diff(&a, &b) < 1e-10);
            assert_eq!(
                spectral::green_convolve(&f),
                spectral::helmholtz_inverse(&f, 1.0).unwrap()
            );
        }
    }
}

#[test]
fn parseval_holds_for_arbitrary_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    use rand::Rng;
    for n in [16, 64, 256] {
        let g = grid(n);
        let f = Field::new(g, (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let physical: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * g.dx();
        let spectral = f.spectrum().energy();
        assert!((physical - spectral).abs() <= 1e-12 * physical);
    }
}

#[test]
fn green_convolve_is_an_l2_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = grid(64);
    for _ in 0..20 {
        let f = band_limited(g, 30, &mut rng);
        assert!(spectral::green_convolve(&f).l2_norm() <= f.l2_norm() * (1.0 + 1e-14));
    }
}

#[test]
fn green_convolve_matches_kernel_quadrature() {
    // ∂_x (p * F) with p the periodized ½e^{-|x|}, evaluated independently.
    let g = grid(64);
    let f = |y: f64| 0.5 * y.cos().powi(2) + (2.0 * y).sin() + 0.3;
    let field = Field::from_fn(g, f);
    let conv = spectral::derivative(&spectral::green_convolve(&field));
    for j in (0..64).step_by(7) {
        let x = g.x(j);
        let oracle = kernel_derivative_convolution(f, x);
        assert!(
            (conv.values()[j] - oracle).abs() < 1e-10,
            "x = {x}: {} vs {oracle}",
            conv.values()[j]
        );
    }
}

#[test]
fn dealiased_product_matches_pointwise_when_band_limited() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = grid(128);
    for _ in 0..10 {
        let f = band_limited(g, 21, &mut rng);
        let h = band_limited(g, 21, &mut rng);
        let p = spectral::dealiased_product(&f, &h).unwrap();
        assert!(max_diff(&p, &f.pointwise(&h)) < 1e-12);
    }
}
