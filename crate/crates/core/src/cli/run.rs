//! Scenario execution. Each scenario writes `series.csv` and `summary.json`
//! into the output directory, plus scenario-specific tables.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use super::config::{ConfigError, ParamsConfig, RunConfig, Scenario};
use super::output;
use crate::characteristics::{self, sigma_bounds_check};
use crate::dynamics::{self, Direction, State};
use crate::friedrichs;
use crate::integrator::{self, SeriesRecord, SimResult, StepControl, Verdict};
use crate::littlewood_paley::{self as lp, besov_norm, sobolev_norm};
use crate::params::ParamSet;
use crate::spectral::{self, Field};
use crate::theory;

/// Process exit status: success, error (or a failed check), detected blow-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    Failure,
    BlowUp,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::BlowUp => 2,
        }
    }

    fn from_verdict(v: &Verdict) -> Self {
        match v {
            Verdict::Completed => ExitStatus::Success,
            Verdict::BlewUp { .. } => ExitStatus::BlowUp,
            Verdict::StepUnderflow { .. } | Verdict::NonFinite { .. } => ExitStatus::Failure,
        }
    }

    fn from_check(ok: bool) -> Self {
        if ok {
            ExitStatus::Success
        } else {
            ExitStatus::Failure
        }
    }

    /// Failure dominates blow-up, which dominates success.
    fn combine(self, other: Self) -> Self {
        use ExitStatus::*;
        match (self, other) {
            (Failure, _) | (_, Failure) => Failure,
            (BlowUp, _) | (_, BlowUp) => BlowUp,
            _ => Success,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Core(#[from] crate::Error),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: ExitStatus,
    pub summary: Value,
}

struct Setup {
    u0: Field,
    sigma0: Field,
    ps: ParamSet,
}

impl Setup {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let grid = cfg.grid();
        Ok(Self {
            u0: cfg.u0.sample(grid)?,
            sigma0: cfg.sigma0.sample(grid)?,
            ps: cfg.params.build()?,
        })
    }

    fn state(&self) -> Result<State, CliError> {
        Ok(State::new(self.u0.clone(), self.sigma0.clone(), 0.0)?)
    }
}

/// Runs the configured scenario, writing all files into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(out)?;
    let (status, mut summary) = match cfg.scenario {
        Scenario::Simulate => simulate_scenario(cfg, out)?,
        Scenario::TransformCheck => transform_check(cfg, out)?,
        Scenario::Friedrichs => friedrichs_scenario(cfg, out)?,
        Scenario::BlowupScan => blowup_scan(cfg, out)?,
        Scenario::Norms => norms_scenario(cfg, out)?,
        Scenario::BoundsReport => bounds_report(cfg, out)?,
    };
    summary["exit_code"] = json!(status.code());
    summary["config"] = serde_json::to_value(cfg).expect("config serializes");
    output::write_json(&out.join("summary.json"), &summary)?;
    Ok(Outcome { status, summary })
}

fn trapezoid(series: &[SeriesRecord], f: impl Fn(&SeriesRecord) -> f64) -> f64 {
    series
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
        .sum()
}

/// Linear interpolation of a recorded quantity at time `t`.
fn series_at(series: &[SeriesRecord], t: f64, f: impl Fn(&SeriesRecord) -> f64) -> f64 {
    let k = series.partition_point(|r| r.t <= t);
    if k == 0 {
        return f(&series[0]);
    }
    if k == series.len() {
        return f(&series[k - 1]);
    }
    let (a, b) = (&series[k - 1], &series[k]);
    let w = (t - a.t) / (b.t - a.t);
    f(a) * (1.0 - w) + f(b) * w
}

fn m_chi_summary(r: &SimResult) -> Value {
    let first = r.series[0].m_chi;
    let last = r.series.last().expect("nonempty").m_chi;
    let sandwich = r
        .series
        .iter()
        .all(|s| 0.25 * s.l2_u * s.l2_u <= s.m_chi && s.m_chi <= s.l2_u * s.l2_u);
    json!({
        "initial": first,
        "final": last,
        "relative_drift": if first != 0.0 { (last - first) / first } else { last - first },
        "gamma_flux_integral": trapezoid(&r.series, |s| s.gamma_flux),
        "sandwich_holds": sandwich,
    })
}

fn write_run_files(
    cfg: &RunConfig,
    r: &SimResult,
    ps: &ParamSet,
    dir: &Path,
) -> Result<Value, CliError> {
    output::write_series(&dir.join("series.csv"), &r.series)?;
    if cfg.output.frames {
        output::write_frames(&dir.join("frames.csv"), &r.frames)?;
    }
    if !cfg.output.traces {
        return Ok(Value::Null);
    }
    let length = r.initial().grid().length();
    let seeds = characteristics::equispaced_seeds(length, cfg.output.trace_seeds);
    let trace = characteristics::trace(r, ps, &seeds)?;
    output::write_traces(&dir.join("traces.csv"), &trace)?;
    let min_jacobian = trace
        .jacobians
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(json!({
        "sigma_invariant_error": characteristics::sigma_invariant_error(r, &trace)?,
        "min_jacobian": min_jacobian,
    }))
}

fn verdict_json(v: &Verdict) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

fn simulate_scenario(cfg: &RunConfig, out: &Path) -> Result<(ExitStatus, Value), CliError> {
    let setup = Setup::new(cfg)?;
    let r = integrator::simulate(
        &setup.state()?,
        &setup.ps,
        cfg.t_end,
        &cfg.step,
        cfg.besov.s,
    )?;
    let characteristics = write_run_files(cfg, &r, &setup.ps, out)?;
    let summary = json!({
        "scenario": "simulate",
        "verdict": verdict_json(&r.verdict),
        "final_time": r.final_time(),
        "steps": r.series.len() - 1,
        "m_chi": m_chi_summary(&r),
        "sigma_bounds": sigma_bounds_check(&r),
        "characteristics": characteristics,
    });
    Ok((ExitStatus::from_verdict(&r.verdict), summary))
}

fn transform_check(cfg: &RunConfig, out: &Path) -> Result<(ExitStatus, Value), CliError> {
    let setup = Setup::new(cfg)?;
    let ParamsConfig::WeaklyDissipative { b, kappa, lambda } = cfg.params else {
        unreachable!("checked when parsing the config");
    };
    let st = setup.state()?;
    let s_norm = cfg.besov.s;

    let direct = integrator::simulate(&st, &setup.ps, cfg.t_end, &cfg.step, s_norm)?;
    output::write_series(&out.join("series.csv"), &direct.series)?;

    // The rescaled reference is interpolated in time, so it keeps every step.
    let dense = StepControl {
        output_interval: 0.0,
        ..cfg.step
    };
    let s_end = dynamics::rescaled_time(lambda, cfg.t_end);
    let undamped = integrator::simulate(&st, &ParamSet::b_family(b, kappa), s_end, &dense, s_norm)?;
    // `e^{λt}` times a weakly dissipative solution solves the system with
    // coefficients `e^{-λt}(1, b, κ, 1)`, i.e. the damped preset at rate λ/2.
    let weighted = integrator::simulate(
        &st,
        &ParamSet::damped_preset(b, kappa, 0.5 * lambda)?,
        cfg.t_end,
        &cfg.step,
        s_norm,
    )?;

    let runs_ok = [&direct, &undamped, &weighted]
        .iter()
        .all(|r| r.verdict == Verdict::Completed);
    let max_diff =
        |a: &State, b: &State| a.u.sub(&b.u).max_abs().max(a.sigma.sub(&b.sigma).max_abs());

    let mut rescale_err: f64 = 0.0;
    let mut weight_err: f64 = 0.0;
    let mut roundtrip_err: f64 = 0.0;
    if runs_ok {
        for f in &direct.frames {
            let mapped = dynamics::time_rescale_transform(&undamped.frames, lambda, f.t)?;
            rescale_err = rescale_err.max(max_diff(&mapped, f));
        }
        for f in &weighted.frames {
            let back = dynamics::exp_weight_transform(f, lambda, Direction::Inverse)?;
            let reference = dynamics::interpolate_states(&direct.frames, f.t)?;
            weight_err = weight_err.max(max_diff(&back, &reference));
            let again = dynamics::exp_weight_transform(&back, lambda, Direction::Forward)?;
            roundtrip_err = roundtrip_err.max(max_diff(&again, f));
        }
    }
    let tol = cfg.transform.tolerance;
    let passed = runs_ok && rescale_err <= tol && weight_err <= tol && roundtrip_err <= tol;
    let summary = json!({
        "scenario": "transform-check",
        "verdicts": {
            "direct": verdict_json(&direct.verdict),
            "undamped": verdict_json(&undamped.verdict),
            "weighted": verdict_json(&weighted.verdict),
        },
        "rescaled_final_time": s_end,
        "time_rescale_max_error": rescale_err,
        "exp_weight_max_error": weight_err,
        "exp_weight_roundtrip_error": roundtrip_err,
        "max_discrepancy": rescale_err.max(weight_err).max(roundtrip_err),
        "tolerance": tol,
        "passed": passed,
    });
    let status = if runs_ok {
        ExitStatus::from_check(passed)
    } else {
        [&direct, &undamped, &weighted]
            .iter()
            .fold(ExitStatus::Success, |s, r| {
                s.combine(ExitStatus::from_verdict(&r.verdict))
            })
    };
    Ok((status, summary))
}

fn friedrichs_scenario(cfg: &RunConfig, out: &Path) -> Result<(ExitStatus, Value), CliError> {
    let setup = Setup::new(cfg)?;
    let spec = cfg.besov;
    let fc = cfg.friedrichs;
    let records = friedrichs::iterate(
        &setup.u0,
        &setup.sigma0,
        &setup.ps,
        spec,
        cfg.t_end,
        fc.n_max + 1,
        fc.frames,
    )?;

    let h0 = theory::data_norm(&setup.u0, &setup.sigma0, spec);
    let h = theory::h_modulus(h0, &setup.ps, &cfg.theory).ok();
    let condition =
        theory::theorem11_check(&setup.u0, &setup.sigma0, spec, &setup.ps, &cfg.theory).ok();
    let sup_h: Vec<f64> = records.iter().map(|r| r.sup_h()).collect();
    let uniform_bound = h.map(|h| 2.0 * h * 1.1);
    let uniform_ok = uniform_bound.map(|b| sup_h.iter().all(|x| *x <= b));

    let matrix: Vec<Vec<f64>> = (1..=fc.n_max)
        .map(|m| friedrichs::cauchy_differences(&records, m))
        .collect::<crate::Result<_>>()?;
    let first = &matrix[0];
    // Ratios sup 𝓗^(n+1,1) / sup 𝓗^(n,1) for n = 1, 2, ...
    let ratios: Vec<f64> = first.windows(2).map(|w| w[1] / w[0]).collect();
    let ratios_ok = ratios.iter().skip(2).all(|r| *r <= 0.75);

    let reference_ctrl = StepControl {
        output_interval: cfg.t_end / fc.frames as f64,
        ..cfg.step
    };
    let reference = integrator::simulate(
        &setup.state()?,
        &setup.ps,
        cfg.t_end,
        &reference_ctrl,
        spec.s,
    )?;
    output::write_series(&out.join("series.csv"), &reference.series)?;

    let last_difference = first[fc.n_max - 1];
    let distance = match reference.verdict {
        Verdict::Completed => Some(friedrichs::distance_to_trajectory(
            &records[fc.n_max - 1],
            &reference.frames,
        )?),
        _ => None,
    };
    let distance_ok = distance.map(|d| d <= 2.0 * last_difference);

    let mut rows = Vec::new();
    for r in &records {
        for (t, hv) in r.times().iter().zip(&r.h_series) {
            rows.push(vec![r.n as f64, *t, *hv]);
        }
    }
    output::write_table(&out.join("iterates.csv"), "n,t,H", &rows)?;
    let mut rows = Vec::new();
    for (mi, col) in matrix.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            rows.push(vec![(i + 1) as f64, (mi + 1) as f64, *v]);
        }
    }
    output::write_table(&out.join("cauchy.csv"), "n,m,sup_H", &rows)?;

    let passed = uniform_ok.unwrap_or(false) && ratios_ok && distance_ok.unwrap_or(false);
    let summary = json!({
        "scenario": "friedrichs",
        "iterates": records.len(),
        "data_norm": h0,
        "h_of_data_norm": h,
        "theorem11": condition,
        "sup_h": sup_h,
        "uniform_bound": uniform_bound,
        "uniform_bound_holds": uniform_ok,
        "cauchy_m1": first,
        "cauchy_ratios": ratios,
        "cauchy_ratios_hold": ratios_ok,
        "reference_verdict": verdict_json(&reference.verdict),
        "final_iterate": fc.n_max,
        "distance_to_simulation": distance,
        "distance_bound": 2.0 * last_difference,
        "distance_holds": distance_ok,
        "passed": passed,
    });
    Ok((ExitStatus::from_check(passed), summary))
}

fn blowup_run(cfg: &RunConfig, scale: f64, dir: &Path) -> Result<(ExitStatus, Value), CliError> {
    std::fs::create_dir_all(dir)?;
    let setup = Setup::new(cfg)?;
    let u0 = setup.u0.scale(scale);
    let st = State::new(u0.clone(), setup.sigma0.clone(), 0.0)?;
    let s = cfg.besov.s;
    let r = integrator::simulate(&st, &setup.ps, cfg.t_end, &cfg.step, s)?;
    let characteristics = write_run_files(cfg, &r, &setup.ps, dir)?;
    let lower = theory::blowup_lower_bound(&u0, &setup.sigma0, s, &setup.ps, &cfg.theory)?;

    let blowup_time = r.verdict.blowup_time();
    let integral = blowup_time.map(|t| {
        let at = series_at(&r.series, t, |x| x.blowup_integral);
        let half = series_at(&r.series, 0.5 * t, |x| x.blowup_integral);
        json!({ "at_blowup": at, "at_half_time": half, "ratio": at / half })
    });

    // Slope bound sup u_x <= ‖u₀,ₓ‖_∞ + 𝓛(t) when β = 3α, reported over the
    // resolved part of the run and over every step.
    let slope = if setup
        .ps
        .beta_is_three_alpha(&r.series.iter().map(|x| x.t).collect::<Vec<_>>())
    {
        let l = theory::l_of_t_running(&r, &setup.ps, s)?;
        let ux0 = spectral::derivative(&u0).max_abs();
        let check = |only_resolved: bool| {
            let mut ok = true;
            let mut margin = f64::INFINITY;
            for (rec, lt) in r.series.iter().zip(&l) {
                if only_resolved && !rec.is_resolved() {
                    continue;
                }
                let bound = ux0 + lt;
                if rec.sup_ux > bound * (1.0 + theory::BOUND_SLACK) {
                    ok = false;
                }
                // At t = 0 the bound equals sup u_x by construction.
                if rec.t > 0.0 && rec.sup_ux > 0.0 {
                    margin = margin.min(bound / rec.sup_ux);
                }
            }
            json!({ "holds": ok, "margin": margin })
        };
        let last_resolved = r
            .series
            .iter()
            .take_while(|x| x.is_resolved())
            .last()
            .map(|x| x.t);
        json!({
            "resolved": check(true),
            "all_steps": check(false),
            "last_resolved_time": last_resolved,
        })
    } else {
        Value::Null
    };

    let summary = json!({
        "scale": scale,
        "verdict": verdict_json(&r.verdict),
        "blowup_time": blowup_time,
        "lower_bound": lower,
        "exceeds_lower_bound": blowup_time.map(|t| t >= lower.time),
        "monitored_integral": integral,
        "slope_bound": slope,
        "characteristics": characteristics,
    });
    Ok((ExitStatus::from_verdict(&r.verdict), summary))
}

fn blowup_scan(cfg: &RunConfig, out: &Path) -> Result<(ExitStatus, Value), CliError> {
    let scales = &cfg.scan.scales;
    if let [scale] = scales[..] {
        let (status, mut summary) = blowup_run(cfg, scale, out)?;
        summary["scenario"] = json!("blowup-scan");
        return Ok((status, summary));
    }
    let dirs: Vec<PathBuf> = (0..scales.len())
        .map(|i| out.join(format!("run-{i:03}")))
        .collect();
    let runs: Vec<(ExitStatus, Value)> = scales
        .par_iter()
        .zip(&dirs)
        .map(|(&scale, dir)| {
            let (status, mut summary) = blowup_run(cfg, scale, dir)?;
            summary["exit_code"] = json!(status.code());
            output::write_json(&dir.join("summary.json"), &summary)?;
            Ok((status, summary))
        })
        .collect::<Result<_, CliError>>()?;
    // The top-level series is that of the first run.
    std::fs::copy(dirs[0].join("series.csv"), out.join("series.csv"))?;
    let status = runs.iter().fold(ExitStatus::Success, |s, r| s.combine(r.0));
    let summary = json!({
        "scenario": "blowup-scan",
        "runs": runs.into_iter().map(|r| r.1).collect::<Vec<_>>(),
    });
    Ok((status, summary))
}

fn norms_scenario(cfg: &RunConfig, out: &Path) -> Result<(ExitStatus, Value), CliError> {
    let setup = Setup::new(cfg)?;
    let spec = cfg.besov;
    let st = setup.state()?;
    output::write_series(
        &out.join("series.csv"),
        &[integrator::initial_record(&st, &setup.ps, spec.s)],
    )?;

    let du = lp::decompose(&setup.u0);
    let ds = lp::decompose(&setup.sigma0);
    let rows: Vec<Vec<f64>> = (-1..=du.q_max())
        .map(|q| {
            let l2 = |d: &lp::DyadicDecomposition| d.block(q).map_or(0.0, |b| b.l2_norm());
            vec![q as f64, l2(&du), l2(&ds)]
        })
        .collect();
    output::write_table(
        &out.join("blocks.csv"),
        "q,u_block_l2,sigma_block_l2",
        &rows,
    )?;

    let top = du.q_max() - 2;
    let decay: Vec<Value> = (0..top.max(0))
        .map(|n| {
            let ratio = lp::low_pass_decay_ratio(&setup.u0, n, spec.s).ok();
            json!({ "n": n, "ratio": ratio })
        })
        .collect();
    let fitted = lp::fit_low_pass_constant(std::slice::from_ref(&setup.u0), spec.s, top).ok();

    let summary = json!({
        "scenario": "norms",
        "besov_u": besov_norm(&setup.u0, spec),
        "besov_sigma": besov_norm(&setup.sigma0, spec.with_s(spec.s - 1.0)),
        "sobolev_u": sobolev_norm(&setup.u0, spec.s),
        "sobolev_sigma": sobolev_norm(&setup.sigma0, spec.s - 1.0),
        "data_norm": theory::data_norm(&setup.u0, &setup.sigma0, spec),
        "l2_u": setup.u0.l2_norm(),
        "l2_sigma": setup.sigma0.l2_norm(),
        "q_max": du.q_max(),
        "low_pass_decay": decay,
        "low_pass_constant": fitted,
    });
    Ok((ExitStatus::Success, summary))
}

fn bounds_report(cfg: &RunConfig, out: &Path) -> Result<(ExitStatus, Value), CliError> {
    let setup = Setup::new(cfg)?;
    let spec = cfg.besov;
    let s = spec.s;
    let (u0, sigma0, ps) = (&setup.u0, &setup.sigma0, &setup.ps);
    let r = integrator::simulate(&setup.state()?, ps, cfg.t_end, &cfg.step, s)?;
    let characteristics = write_run_files(cfg, &r, ps, out)?;

    let theorem11 = theory::theorem11_check(u0, sigma0, spec, ps, &cfg.theory).ok();
    let (theorem13, lambda_min) = match cfg.params {
        ParamsConfig::WeaklyDissipative { b, kappa, lambda } => (
            theory::theorem13_check(u0, sigma0, spec, b, kappa, lambda, &cfg.theory).ok(),
            Some(theory::remark14_lambda_min(
                u0,
                sigma0,
                spec,
                b,
                kappa,
                &cfg.theory,
            )),
        ),
        _ => (None, None),
    };
    let lower = theory::blowup_lower_bound(u0, sigma0, s, ps, &cfg.theory)?;

    let times: Vec<f64> = r.series.iter().map(|x| x.t).collect();
    let beta3 = ps.beta_is_three_alpha(&times);
    let (lemma41, mut bounds_ok) = if beta3 {
        let (l2, linf) = theory::lemma41_bounds(&r, ps, s)?;
        let ok = l2.satisfied && linf.satisfied;
        let brief =
            |b: &theory::BoundReport| json!({ "satisfied": b.satisfied, "margin": b.margin });
        (json!({ "l2": brief(&l2), "linf": brief(&linf) }), ok)
    } else {
        (Value::Null, true)
    };
    let sigma = sigma_bounds_check(&r);
    bounds_ok &= sigma.satisfied;

    let summary = json!({
        "scenario": "bounds-report",
        "verdict": verdict_json(&r.verdict),
        "final_time": r.final_time(),
        "theorem11": theorem11,
        "theorem13": theorem13,
        "lambda_min": lambda_min,
        "blowup_lower_bound": lower,
        "beta_is_three_alpha": beta3,
        "lemma41": lemma41,
        "sigma_bounds": sigma,
        "m_chi": m_chi_summary(&r),
        "characteristics": characteristics,
        "a_priori_bounds_hold": bounds_ok,
    });
    let status = ExitStatus::from_verdict(&r.verdict).combine(ExitStatus::from_check(bounds_ok));
    Ok((status, summary))
}
