//! Classical RK4 time stepping with CFL control, blow-up detection and
//! per-step diagnostics.

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, RhsForm, State};
use crate::error::{Error, Result};
use crate::littlewood_paley::sobolev_norm;
use crate::params::{Coefficients, ParamSet};
use crate::spectral::{self, Field};
use crate::theory::m_chi_functional;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub dt_init: f64,
    pub cfl: f64,
    pub dt_min: f64,
    pub blowup_slope_threshold: f64,
    pub norm_guard: f64,
    /// Spacing of stored frames; `0` stores every step.
    pub output_interval: f64,
    pub rhs: RhsForm,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            dt_init: 1e-2,
            cfl: 0.3,
            dt_min: 1e-9,
            blowup_slope_threshold: -1e3,
            norm_guard: 1e8,
            output_interval: 0.1,
            rhs: RhsForm::Nonlocal,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParam(msg.to_string()));
        if !(self.dt_init > 0.0 && self.dt_init.is_finite()) {
            return bad("dt_init must be positive");
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_init) {
            return bad("dt_min must satisfy 0 < dt_min < dt_init");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]");
        }
        if !(self.blowup_slope_threshold < 0.0) {
            return bad("blowup_slope_threshold must be negative");
        }
        if !(self.norm_guard > 0.0) {
            return bad("norm_guard must be positive");
        }
        if !(self.output_interval >= 0.0 && self.output_interval.is_finite()) {
            return bad("output_interval must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Completed,
    BlewUp { t: f64 },
    StepUnderflow { t: f64 },
    NonFinite { t: f64 },
}

impl Verdict {
    pub fn blowup_time(&self) -> Option<f64> {
        match self {
            Verdict::BlewUp { t } => Some(*t),
            _ => None,
        }
    }
}

/// Records with `spectral_tail` at or below this value count as resolved.
pub const RESOLVED_TAIL: f64 = 1e-6;

/// Diagnostics recorded after every accepted step (and at the start).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub t: f64,
    pub hs_u: f64,
    pub hs_sigma: f64,
    pub l2_u: f64,
    pub l2_sigma: f64,
    pub linf_u: f64,
    pub linf_sigma: f64,
    pub inf_ux: f64,
    pub sup_ux: f64,
    pub m_chi: f64,
    /// `inf_x ξ(t) u_x`.
    pub inf_xi_ux: f64,
    /// `∫₀ᵗ inf_x ξ u_x dt'`.
    pub int_inf_xi_ux: f64,
    /// `γ(t) (σ², χ_x)`, the rate of change of `(m, χ)` when `β = 3α`.
    pub gamma_flux: f64,
    /// `∫₀ᵗ (|α|+|γ|+|ξ|) ‖u_x‖_{L^∞} dt'`.
    pub blowup_integral: f64,
    /// Fraction of the energy of `u` carried by modes in the upper third of
    /// the dealiased band; grows once a front is no longer resolved.
    pub spectral_tail: f64,
    /// Step that produced this record; zero for the initial record.
    pub dt: f64,
}

impl SeriesRecord {
    pub fn ux_linf(&self) -> f64 {
        self.inf_ux.abs().max(self.sup_ux.abs())
    }

    pub fn is_resolved(&self) -> bool {
        self.spectral_tail <= RESOLVED_TAIL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub frames: Vec<State>,
    /// `series[frame_index[i]]` is the record taken at `frames[i].t`.
    pub frame_index: Vec<usize>,
    pub series: Vec<SeriesRecord>,
    pub verdict: Verdict,
    pub s_norm: f64,
}

impl SimResult {
    pub fn last_frame(&self) -> &State {
        self.frames
            .last()
            .expect("simulate stores the initial frame")
    }

    pub fn initial(&self) -> &State {
        &self.frames[0]
    }

    pub fn final_time(&self) -> f64 {
        self.series.last().map_or(0.0, |r| r.t)
    }
}

fn measure(
    s: &State,
    c: Coefficients,
    s_norm: f64,
    prev: Option<&SeriesRecord>,
    dt: f64,
) -> SeriesRecord {
    let ux = spectral::derivative(&s.u);
    let inf_ux = ux.min();
    let sup_ux = ux.max();
    let inf_xi_ux = if c.xi >= 0.0 {
        c.xi * inf_ux
    } else {
        c.xi * sup_ux
    };
    let chi_x = spectral::derivative(
        &spectral::helmholtz_inverse(&s.u, 4.0).expect("shift 4 is supported"),
    );
    let sigma_sq = spectral::dealiased_product(&s.sigma, &s.sigma).expect("same grid");
    let gamma_flux = c.gamma * sigma_sq.inner(&chi_x);
    let int_inf = prev.map_or(0.0, |p| {
        p.int_inf_xi_ux + 0.5 * dt * (p.inf_xi_ux + inf_xi_ux)
    });
    SeriesRecord {
        t: s.t,
        hs_u: sobolev_norm(&s.u, s_norm),
        hs_sigma: sobolev_norm(&s.sigma, s_norm - 1.0),
        l2_u: s.u.l2_norm(),
        l2_sigma: s.sigma.l2_norm(),
        linf_u: s.u.max_abs(),
        linf_sigma: s.sigma.max_abs(),
        inf_ux,
        sup_ux,
        m_chi: m_chi_functional(s),
        inf_xi_ux,
        int_inf_xi_ux: int_inf,
        gamma_flux,
        blowup_integral: 0.0,
        spectral_tail: spectral_tail(&s.u),
        dt,
    }
}

fn spectral_tail(u: &Field) -> f64 {
    let grid = u.grid();
    let cutoff = grid.dealias_cutoff();
    let spec = u.spectrum();
    let (mut tail, mut total) = (0.0, 0.0);
    for (j, c) in spec.coeffs().iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if 3 * grid.mode(j).abs() > 2 * cutoff {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

fn add_scaled(s: &State, dt: f64, k: &dynamics::Tendency) -> State {
    State {
        u: s.u.axpy(dt, &k.du),
        sigma: s.sigma.axpy(dt, &k.dsigma),
        t: s.t + dt,
    }
}

/// One RK4 step with coefficients supplied as a function of time.
pub fn step_rk4_with(
    s: &State,
    dt: f64,
    form: RhsForm,
    coeff: impl Fn(f64) -> Coefficients,
) -> Result<State> {
    let f = |st: &State, t: f64| dynamics::evaluate(form, st, coeff(t));
    let h = 0.5 * dt;
    let k1 = f(s, s.t);
    let s2 = add_scaled(s, h, &k1);
    let k2 = f(&s2, s.t + h);
    let s3 = add_scaled(s, h, &k2);
    let k3 = f(&s3, s.t + h);
    let s4 = add_scaled(s, dt, &k3);
    let k4 = f(&s4, s.t + dt);
    let combine = |a: &Field, b1: &Field, b2: &Field, b3: &Field, b4: &Field| {
        let n = a.values().len();
        let v: Vec<f64> = (0..n)
            .map(|j| {
                a.values()[j]
                    + dt / 6.0
                        * (b1.values()[j]
                            + 2.0 * b2.values()[j]
                            + 2.0 * b3.values()[j]
                            + b4.values()[j])
            })
            .collect();
        Field::new(a.grid(), v)
    };
    let t_new = s.t + dt;
    let u =
        combine(&s.u, &k1.du, &k2.du, &k3.du, &k4.du).map_err(|_| Error::NonFinite { t: t_new })?;
    let sigma = combine(&s.sigma, &k1.dsigma, &k2.dsigma, &k3.dsigma, &k4.dsigma)
        .map_err(|_| Error::NonFinite { t: t_new })?;
    Ok(State { u, sigma, t: t_new })
}

pub fn step_rk4(s: &State, ps: &ParamSet, dt: f64, rhs: RhsForm) -> Result<State> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParam(format!(
            "dt must be positive, got {dt}"
        )));
    }
    step_rk4_with(s, dt, rhs, |t| ps.coefficients_at(t))
}

/// CFL-limited step size at the current state.
pub fn cfl_step(s: &State, c: Coefficients, ctrl: &StepControl) -> f64 {
    let umax = s.u.max_abs();
    let speed = 1f64.max((c.alpha * umax).abs()).max((c.xi * umax).abs());
    ctrl.dt_init.min(ctrl.cfl * s.grid().dx() / speed)
}

pub fn simulate(
    s0: &State,
    ps: &ParamSet,
    t_end: f64,
    ctrl: &StepControl,
    s_norm: f64,
) -> Result<SimResult> {
    ctrl.validate()?;
    if !(t_end > s0.t) {
        return Err(Error::Precondition(format!(
            "t_end = {t_end} must exceed the initial time {}",
            s0.t
        )));
    }
    if !(s_norm > 1.5) {
        return Err(Error::Hypothesis(format!(
            "regularity index s = {s_norm} must exceed 3/2"
        )));
    }
    s0.u.same_grid(&s0.sigma)?;

    let mut state = s0.clone();
    let first = record(&state, ps, s_norm, None, 0.0);
    let mut series = vec![first];
    let mut frames = vec![state.clone()];
    let mut frame_index = vec![0];
    let mut next_output = if ctrl.output_interval > 0.0 {
        (s0.t + ctrl.output_interval).min(t_end)
    } else {
        t_end
    };
    let time_tol = 1e-12 * t_end.abs().max(1.0);
    let mut verdict = Verdict::Completed;

    while state.t < t_end - time_tol {
        let c = ps.coefficients_at(state.t);
        let dt_cfl = cfl_step(&state, c, ctrl);
        if dt_cfl < ctrl.dt_min {
            verdict = Verdict::StepUnderflow { t: state.t };
            break;
        }
        let target = if ctrl.output_interval > 0.0 {
            next_output
        } else {
            t_end
        };
        let mut dt = dt_cfl.min(target - state.t);
        // Avoid leaving a sliver before the next output time.
        if target - (state.t + dt) < 1e-3 * dt_cfl {
            dt = target - state.t;
        }
        let next = match step_rk4_with(&state, dt, ctrl.rhs, |t| ps.coefficients_at(t)) {
            Ok(n) => n,
            Err(_) => {
                verdict = Verdict::NonFinite { t: state.t + dt };
                break;
            }
        };
        let mut next = next;
        if (next.t - target).abs() <= time_tol {
            next.t = target;
        }
        if next.u.max_abs() > ctrl.norm_guard || next.sigma.max_abs() > ctrl.norm_guard {
            verdict = Verdict::NonFinite { t: next.t };
            break;
        }
        let rec = record(&next, ps, s_norm, series.last(), dt);
        series.push(rec);
        state = next;

        let at_output = ctrl.output_interval == 0.0 || state.t >= next_output - time_tol;
        let blew_up = rec.inf_ux < ctrl.blowup_slope_threshold;
        if at_output || blew_up || state.t >= t_end - time_tol {
            frames.push(state.clone());
            frame_index.push(series.len() - 1);
            if ctrl.output_interval > 0.0 && at_output {
                next_output = (next_output + ctrl.output_interval).min(t_end);
            }
        }
        if blew_up {
            verdict = Verdict::BlewUp { t: state.t };
            break;
        }
    }

    Ok(SimResult {
        frames,
        frame_index,
        series,
        verdict,
        s_norm,
    })
}

/// Diagnostics of a single state, as recorded at the start of a run.
pub fn initial_record(s: &State, ps: &ParamSet, s_norm: f64) -> SeriesRecord {
    record(s, ps, s_norm, None, 0.0)
}

fn record(
    s: &State,
    ps: &ParamSet,
    s_norm: f64,
    prev: Option<&SeriesRecord>,
    dt: f64,
) -> SeriesRecord {
    let c = ps.coefficients_at(s.t);
    let mut rec = measure(s, c, s_norm, prev, dt);
    let weight = |c: Coefficients| c.alpha.abs() + c.gamma.abs() + c.xi.abs();
    rec.blowup_integral = match prev {
        None => 0.0,
        Some(p) => {
            let cp = ps.coefficients_at(p.t);
            p.blowup_integral + 0.5 * dt * (weight(cp) * p.ux_linf() + weight(c) * rec.ux_linf())
        }
    };
    rec
}

/// Trapezoid rule for `∫ (|α|+|γ|+|ξ|) ‖u_x‖_{L^∞}` over the recorded series.
pub fn theorem15_integral(result: &SimResult, ps: &ParamSet) -> Result<f64> {
    if result.series.is_empty() {
        return Err(Error::Precondition("empty series".into()));
    }
    let g = |r: &SeriesRecord| {
        let c = ps.coefficients_at(r.t);
        (c.alpha.abs() + c.gamma.abs() + c.xi.abs()) * r.ux_linf()
    };
    Ok(result
        .series
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (g(&w[0]) + g(&w[1])))
        .sum())
}
