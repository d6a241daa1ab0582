//! Flow map `ψ` generated by `ξ(t) u`, its Jacobian and the transported
//! quantity `σ(t, ψ) ψ_x`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::SimResult;
use crate::params::ParamSet;
use crate::spectral::Spectrum;

/// Largest number of solver steps allowed between consecutive frames.
pub const MAX_STEPS_PER_FRAME: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharTrace {
    pub seeds: Vec<f64>,
    /// Frame times at which the trace is sampled.
    pub times: Vec<f64>,
    /// `positions[i][k]`: `ψ(times[k], seeds[i])` wrapped into `[0, L)`.
    pub positions: Vec<Vec<f64>>,
    /// Unwrapped positions, used for differences across seeds.
    pub unwrapped: Vec<Vec<f64>>,
    /// `ψ_x` from `exp(∫ ξ u_x(t, ψ) dt)`.
    pub jacobians: Vec<Vec<f64>>,
    /// `ψ_x` from centered differences across neighbouring seeds.
    pub jacobians_fd: Vec<Vec<f64>>,
    /// `∫₀ᵗ inf_x ξ u_x dt'` at each frame time.
    pub integral_inf_xi_ux: Vec<f64>,
}

/// `count` equispaced seeds on `[0, L)`.
pub fn equispaced_seeds(length: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| length * i as f64 / count as f64)
        .collect()
}

pub fn trace(result: &SimResult, ps: &ParamSet, seeds: &[f64]) -> Result<CharTrace> {
    let frames = &result.frames;
    if frames.is_empty() {
        return Err(Error::Precondition("no frames to trace".into()));
    }
    if let Some(w) = result
        .frame_index
        .windows(2)
        .find(|w| w[1] - w[0] > MAX_STEPS_PER_FRAME)
    {
        return Err(Error::Precondition(format!(
            "frames too sparse: {} steps between stored frames (at most {MAX_STEPS_PER_FRAME})",
            w[1] - w[0]
        )));
    }
    let length = frames[0].grid().length();
    let spectra: Vec<Spectrum> = frames.iter().map(|f| f.u.spectrum()).collect();
    let times: Vec<f64> = frames.iter().map(|f| f.t).collect();

    // Velocity `ξ u` and strain `ξ u_x` at (t, x), linear in time between frames k, k+1.
    let sample = |k: usize, w: f64, x: f64| -> (f64, f64) {
        let a = (spectra[k].eval(x), spectra[k].eval_derivative(x));
        if w == 0.0 {
            return a;
        }
        let b = (spectra[k + 1].eval(x), spectra[k + 1].eval_derivative(x));
        (a.0 * (1.0 - w) + b.0 * w, a.1 * (1.0 - w) + b.1 * w)
    };

    let paths: Vec<(Vec<f64>, Vec<f64>)> = seeds
        .par_iter()
        .map(|&x0| {
            let mut x = x0;
            let mut log_j = 0.0;
            let mut xs = Vec::with_capacity(frames.len());
            let mut js = Vec::with_capacity(frames.len());
            xs.push(x);
            js.push(1.0);
            for k in 0..frames.len() - 1 {
                let (t0, t1) = (times[k], times[k + 1]);
                let h = t1 - t0;
                let xi = |t: f64| ps.xi.value_at(t);
                let f = |w: f64, x: f64| {
                    let (u, ux) = sample(k, w, x);
                    let c = xi(t0 + w * h);
                    (c * u, c * ux)
                };
                let k1 = f(0.0, x);
                let k2 = f(0.5, x + 0.5 * h * k1.0);
                let k3 = f(0.5, x + 0.5 * h * k2.0);
                let (u1, ux1) = (
                    spectra[k + 1].eval(x + h * k3.0),
                    spectra[k + 1].eval_derivative(x + h * k3.0),
                );
                let k4 = (xi(t1) * u1, xi(t1) * ux1);
                x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                log_j += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
                xs.push(x);
                js.push(log_j.exp());
            }
            (xs, js)
        })
        .collect();

    let nseeds = seeds.len();
    let unwrapped: Vec<Vec<f64>> = paths.iter().map(|p| p.0.clone()).collect();
    let jacobians: Vec<Vec<f64>> = paths.into_iter().map(|p| p.1).collect();
    let positions = unwrapped
        .iter()
        .map(|xs| xs.iter().map(|x| x.rem_euclid(length)).collect())
        .collect();

    let jacobians_fd = (0..nseeds)
        .map(|i| {
            (0..frames.len())
                .map(|k| fd_jacobian(seeds, &unwrapped, length, i, k))
                .collect()
        })
        .collect();

    let integral_inf_xi_ux = result
        .frame_index
        .iter()
        .map(|&i| result.series[i].int_inf_xi_ux)
        .collect();

    Ok(CharTrace {
        seeds: seeds.to_vec(),
        times,
        positions,
        unwrapped,
        jacobians,
        jacobians_fd,
        integral_inf_xi_ux,
    })
}

/// Centered difference of `ψ(t_k, ·)` at seed `i`, treating the seed list as
/// a periodic sample of `[0, L)` (one-sided when fewer than three seeds).
fn fd_jacobian(seeds: &[f64], paths: &[Vec<f64>], length: f64, i: usize, k: usize) -> f64 {
    let n = seeds.len();
    if n < 3 {
        return f64::NAN;
    }
    let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
    let mut dx = seeds[next] - seeds[prev];
    let mut dpsi = paths[next][k] - paths[prev][k];
    if next < i {
        dx += length;
        dpsi += length;
    }
    if prev > i {
        dx += length;
        dpsi += length;
    }
    dpsi / dx
}

/// `max |σ(t, ψ) ψ_x − σ₀(x₀)|` over seeds and frames.
pub fn sigma_invariant_error(result: &SimResult, trace: &CharTrace) -> Result<f64> {
    if trace.times.len() != result.frames.len() {
        return Err(Error::Precondition(
            "trace does not match the simulation frames".into(),
        ));
    }
    let spectra: Vec<Spectrum> = result.frames.iter().map(|f| f.sigma.spectrum()).collect();
    let err = trace
        .seeds
        .par_iter()
        .enumerate()
        .map(|(i, &x0)| {
            let s0 = spectra[0].eval(x0);
            (0..spectra.len())
                .map(|k| {
                    (spectra[k].eval(trace.positions[i][k]) * trace.jacobians[i][k] - s0).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(err)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaBoundsVerdict {
    pub satisfied: bool,
    /// Smallest `bound / observed` for the `L^∞` estimate over `t > 0`.
    pub linf_margin: f64,
    /// Smallest `bound / observed` for the `L²` estimate.
    pub l2_margin: f64,
}

/// Relative slack used when comparing observed norms with the bounds.
pub const SIGMA_BOUND_SLACK: f64 = 1e-6;

/// `‖σ(t)‖_{L^∞} ≤ ‖σ₀‖_{L^∞} e^{−I(t)}` and `‖σ(t)‖_{L²} ≤ ‖σ₀‖_{L²} e^{−I(t)/2}`
/// with `I(t) = ∫₀ᵗ inf_x ξ u_x`, checked at every recorded step.
pub fn sigma_bounds_check(result: &SimResult) -> SigmaBoundsVerdict {
    let first = &result.series[0];
    let mut v = SigmaBoundsVerdict {
        satisfied: true,
        linf_margin: f64::INFINITY,
        l2_margin: f64::INFINITY,
    };
    for rec in &result.series {
        let linf_bound = first.linf_sigma * (-rec.int_inf_xi_ux).exp();
        let l2_bound = first.l2_sigma * (-0.5 * rec.int_inf_xi_ux).exp();
        // At t = 0 both ratios are 1 by construction.
        if rec.t > first.t && rec.linf_sigma > 0.0 {
            v.linf_margin = v.linf_margin.min(linf_bound / rec.linf_sigma);
        }
        if rec.t > first.t && rec.l2_sigma > 0.0 {
            v.l2_margin = v.l2_margin.min(l2_bound / rec.l2_sigma);
        }
        if rec.linf_sigma > linf_bound * (1.0 + SIGMA_BOUND_SLACK)
            || rec.l2_sigma > l2_bound * (1.0 + SIGMA_BOUND_SLACK)
        {
            v.satisfied = false;
        }
    }
    v
}
