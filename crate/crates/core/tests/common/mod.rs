#![allow(dead_code)]

use std::f64::consts::PI;

use bfamily_core::initial_data::Profile;
use bfamily_core::{Field, Grid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn grid(n: usize) -> Grid {
    Grid::periodic(n).unwrap()
}

pub fn bump(g: Grid, amplitude: f64, width: f64, center: f64) -> Field {
    Profile::GaussianBump {
        amplitude,
        width,
        center,
    }
    .sample(g)
    .unwrap()
}

/// Random trigonometric polynomial with modes `1..=kmax` and a random mean.
pub fn band_limited(g: Grid, kmax: usize, rng: &mut ChaCha8Rng) -> Field {
    let c0: f64 = rng.gen_range(-0.5..0.5);
    let c: Vec<(f64, f64)> = (1..=kmax)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Field::from_fn(g, |x| {
        c0 + c
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let k = (i + 1) as f64;
                (a * (k * x).cos() + b * (k * x).sin()) / k
            })
            .sum::<f64>()
    })
}

pub fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Composite Simpson rule with `panels` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∂_z` of the periodized kernel `Σ_j ½ e^{-|z + 2πj|}` on `[-2π, 0]`,
/// taking one-sided limits at both ends.
pub fn periodic_kernel_derivative(z: f64) -> f64 {
    (-20..=20)
        .map(|j| {
            let y = z + 2.0 * PI * j as f64;
            let sign = if j <= 0 { -1.0 } else { 1.0 };
            -0.5 * sign * (-y.abs()).exp()
        })
        .sum()
}

/// `∫₀^{2π} ∂_x G(x - y) F(y) dy` by dense quadrature over `y ∈ (x, x + 2π)`,
/// where the periodized kernel is smooth.
pub fn kernel_derivative_convolution(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    simpson(
        |y| periodic_kernel_derivative(x - y) * f(y),
        x,
        x + 2.0 * PI,
        4000,
    )
}

/// Polynomial-in-mass unrolling of `g_{j+1} = a_j + ∫₀^M g_j` with `g_0 = g0`,
/// evaluated at `M = mass` after `n + 1` steps.
pub fn unrolled_recursion(a: &[f64], mass: f64, g0: f64, n: usize) -> f64 {
    // coefficients of g_j as a polynomial in M
    let mut g = vec![g0];
    for aj in a.iter().take(n + 1) {
        let mut next = vec![*aj];
        next.extend(g.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
        g = next;
    }
    g.iter().rev().fold(0.0, |acc, c| acc * mass + c)
}
