//! Right-hand sides of the two-component system and the damping transforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Coefficients, ParamSet};
use crate::spectral::{self, Field, Grid};

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub sigma: Field,
    pub t: f64,
}

impl State {
    pub fn new(u: Field, sigma: Field, t: f64) -> Result<Self> {
        u.same_grid(&sigma)?;
        u.check_finite()?;
        sigma.check_finite()?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        Ok(Self { u, sigma, t })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            u: Field::zeros(grid),
            sigma: Field::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> Grid {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.sigma.is_finite() && self.t.is_finite()
    }

    /// `m = (1 - ∂_x²) u`.
    pub fn momentum(&self) -> Field {
        spectral::helmholtz(&self.u, 1.0)
    }

    pub fn shifted(&self, cells: usize) -> Self {
        Self {
            u: self.u.shifted(cells),
            sigma: self.sigma.shifted(cells),
            t: self.t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub du: Field,
    pub dsigma: Field,
}

impl Tendency {
    pub fn is_finite(&self) -> bool {
        self.du.is_finite() && self.dsigma.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsForm {
    #[default]
    Nonlocal,
    Momentum,
}

/// 2/3-truncated copy of `f` together with its derivative.
fn truncated_with_derivative(f: &Field) -> (Field, Field) {
    let grid = f.grid();
    let cutoff = grid.dealias_cutoff();
    let mut spec = f.spectrum();
    spec.apply(|j| {
        if grid.mode(j).abs() <= cutoff {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let base = spec.to_field();
    spec.apply(|j| Complex64::new(0.0, grid.wavenumber(j)));
    (base, spec.to_field())
}

/// `∂_x (1 - ∂_x²)^{-1} f`, with the Nyquist mode removed.
fn dx_green(f: &Field) -> Field {
    let grid = f.grid();
    let nyq = grid.nyquist_index();
    let mut spec = f.spectrum();
    spec.apply(|j| {
        if j == nyq {
            return Complex64::new(0.0, 0.0);
        }
        let k = grid.wavenumber(j);
        Complex64::new(0.0, k / (1.0 + k * k))
    });
    spec.to_field()
}

pub fn rhs_nonlocal(s: &State, ps: &ParamSet) -> Result<Tendency> {
    if s.t < 0.0 {
        return Err(Error::NegativeTime(s.t));
    }
    Ok(rhs_nonlocal_with(s, ps.coefficients_at(s.t)))
}

pub(crate) fn rhs_nonlocal_with(s: &State, c: Coefficients) -> Tendency {
    let (u, ux) = truncated_with_derivative(&s.u);
    let (sg, sgx) = truncated_with_derivative(&s.sigma);
    let p = pressure_gradient(&u, &ux, &sg, c);
    let (uv, uxv, sv, sxv) = (u.values(), ux.values(), sg.values(), sgx.values());
    let du = (0..uv.len())
        .map(|j| -c.alpha * uv[j] * uxv[j] - p.values()[j] - c.damping * s.u.values()[j])
        .collect();
    let dsigma = (0..uv.len())
        .map(|j| -c.xi * (uv[j] * sxv[j] + sv[j] * uxv[j]) - c.damping * s.sigma.values()[j])
        .collect();
    let grid = s.grid();
    Tendency {
        du: Field::from_raw(grid, du),
        dsigma: Field::from_raw(grid, dsigma),
    }
}

/// `∂_x p * (β/2 u² + γ/2 σ² + (3α−β)/2 u_x²)` from already truncated inputs.
///
/// The `u_x²` weight is `(3α − β)/2`, the value obtained by inverting
/// `1 − ∂_x²` in the momentum form; at `β = 2α` it gives the classical
/// Camassa–Holm term `½ u_x²`.
fn pressure_gradient(u: &Field, ux: &Field, sigma: &Field, c: Coefficients) -> Field {
    let (uv, uxv, sv) = (u.values(), ux.values(), sigma.values());
    let source = (0..uv.len())
        .map(|j| {
            0.5 * c.beta * uv[j] * uv[j]
                + 0.5 * c.gamma * sv[j] * sv[j]
                + 0.5 * (3.0 * c.alpha - c.beta) * uxv[j] * uxv[j]
        })
        .collect();
    dx_green(&Field::from_raw(u.grid(), source))
}

/// Right-hand sides with the transport terms `α u u_x`, `ξ u σ_x` removed:
/// `(−∂_x p * (…) − λu, −ξ σ u_x − λσ)`.
pub(crate) fn non_transport_terms(s: &State, c: Coefficients) -> Tendency {
    let (u, ux) = truncated_with_derivative(&s.u);
    let (sg, _) = truncated_with_derivative(&s.sigma);
    let p = pressure_gradient(&u, &ux, &sg, c);
    Tendency {
        du: p.scale(-1.0).axpy(-c.damping, &s.u),
        dsigma: sg.pointwise(&ux).scale(-c.xi).axpy(-c.damping, &s.sigma),
    }
}

/// 2/3-truncated `f` and `∂_x f`.
pub(crate) fn truncated_pair(f: &Field) -> (Field, Field) {
    truncated_with_derivative(f)
}

pub fn rhs_momentum(s: &State, ps: &ParamSet) -> Result<Tendency> {
    if s.t < 0.0 {
        return Err(Error::NegativeTime(s.t));
    }
    Ok(rhs_momentum_with(s, ps.coefficients_at(s.t)))
}

pub(crate) fn rhs_momentum_with(s: &State, c: Coefficients) -> Tendency {
    let m = s.momentum();
    let (u, ux) = truncated_with_derivative(&s.u);
    let (md, mx) = truncated_with_derivative(&m);
    let (sg, sgx) = truncated_with_derivative(&s.sigma);
    let grid = s.grid();
    let mt = Field::from_raw(
        grid,
        (0..u.values().len())
            .map(|j| {
                -c.alpha * u.values()[j] * mx.values()[j]
                    - c.beta * ux.values()[j] * md.values()[j]
                    - c.gamma * sg.values()[j] * sgx.values()[j]
                    - c.damping * m.values()[j]
            })
            .collect(),
    );
    let du = spectral::green_convolve(&mt);
    let flux = u.pointwise(&sg);
    let dsigma = spectral::derivative(&flux)
        .scale(-c.xi)
        .axpy(-c.damping, &s.sigma);
    Tendency { du, dsigma }
}

pub(crate) fn evaluate(form: RhsForm, s: &State, c: Coefficients) -> Tendency {
    match form {
        RhsForm::Nonlocal => rhs_nonlocal_with(s, c),
        RhsForm::Momentum => rhs_momentum_with(s, c),
    }
}

/// Linear interpolation in time between stored states.
pub fn interpolate_states(frames: &[State], t: f64) -> Result<State> {
    let (first, last) = match (frames.first(), frames.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::OutOfRange {
                requested: t,
                start: f64::NAN,
                end: f64::NAN,
            })
        }
    };
    let tol = 1e-12 * last.t.abs().max(1.0);
    if t < first.t - tol || t > last.t + tol {
        return Err(Error::OutOfRange {
            requested: t,
            start: first.t,
            end: last.t,
        });
    }
    let i = frames.partition_point(|f| f.t <= t);
    if i == 0 {
        return Ok(State { t, ..first.clone() });
    }
    if i == frames.len() {
        return Ok(State { t, ..last.clone() });
    }
    let (a, b) = (&frames[i - 1], &frames[i]);
    let w = (t - a.t) / (b.t - a.t);
    Ok(State {
        u: a.u.scale(1.0 - w).axpy(w, &b.u),
        sigma: a.sigma.scale(1.0 - w).axpy(w, &b.sigma),
        t,
    })
}

/// Maps a solution `(v, ρ)` of the undamped system to the damped one:
/// `u(t) = e^{-λt} v(s)`, `σ(t) = e^{-λt} ρ(s)` with `s = (1 - e^{-λt})/λ`.
pub fn time_rescale_transform(v_solution: &[State], lambda: f64, t: f64) -> Result<State> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let s = rescaled_time(lambda, t);
    let v = interpolate_states(v_solution, s)?;
    let w = (-lambda * t).exp();
    Ok(State {
        u: v.u.scale(w),
        sigma: v.sigma.scale(w),
        t,
    })
}

/// `(1 - e^{-λt}) / λ`, computed without cancellation for small `λt`.
pub fn rescaled_time(lambda: f64, t: f64) -> f64 {
    -(-lambda * t).exp_m1() / lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Forward,
    Inverse,
}

/// `ũ = e^{λt} u`, `σ̃ = e^{λt} σ` (forward) or the reverse map.
pub fn exp_weight_transform(s: &State, lambda: f64, direction: Direction) -> Result<State> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let w = match direction {
        Direction::Forward => (lambda * s.t).exp(),
        Direction::Inverse => (-lambda * s.t).exp(),
    };
    Ok(State {
        u: s.u.scale(w),
        sigma: s.sigma.scale(w),
        t: s.t,
    })
}
