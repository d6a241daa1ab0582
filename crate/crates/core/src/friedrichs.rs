//! Friedrichs iteration: successive linear transport solves from low-pass
//! projected data, converging to the nonlinear solution.

use crate::dynamics::{self, State};
use crate::error::{Error, Result};
use crate::littlewood_paley::{besov_norm, low_pass, BesovSpec};
use crate::params::{ParamFn, ParamSet};
use crate::spectral::{Field, Grid};

/// Default number of stored frames per iterate.
pub const DEFAULT_FRAMES: usize = 200;

/// A field sampled at increasing times, linearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries {
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
}

impl FieldSeries {
    pub fn new(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::Precondition(
                "series needs matching, non-empty times and fields".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(
                "series times must be strictly increasing".into(),
            ));
        }
        let g = fields[0].grid();
        if fields.iter().any(|f| f.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { times, fields })
    }

    /// The same field at every time in `times`.
    pub fn constant(times: &[f64], f: Field) -> Self {
        Self {
            times: times.to_vec(),
            fields: vec![f; times.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.fields[0].grid()
    }

    pub fn at(&self, t: f64) -> Result<Field> {
        let (a, b) = (self.times[0], *self.times.last().expect("non-empty"));
        let tol = 1e-12 * b.abs().max(1.0);
        if t < a - tol || t > b + tol {
            return Err(Error::OutOfRange {
                requested: t,
                start: a,
                end: b,
            });
        }
        let i = self.times.partition_point(|s| *s <= t);
        if i == 0 {
            return Ok(self.fields[0].clone());
        }
        if i == self.times.len() {
            return Ok(self.fields[i - 1].clone());
        }
        let w = (t - self.times[i - 1]) / (self.times[i] - self.times[i - 1]);
        Ok(self.fields[i - 1].scale(1.0 - w).axpy(w, &self.fields[i]))
    }
}

/// Uniform output grid `k T / frames`, `k = 0..=frames`.
pub fn output_times(t_end: f64, frames: usize) -> Vec<f64> {
    (0..=frames)
        .map(|k| t_end * k as f64 / frames as f64)
        .collect()
}

const TRANSPORT_CFL: f64 = 0.3;

/// Solves `∂_t f + c(t) a(t, x) ∂_x f = F(t, x)` with RK4 in time and
/// spectral derivatives, storing `f` at the advector's sample times.
pub fn linear_transport_solve(
    advector: &FieldSeries,
    coefficient: &ParamFn,
    forcing: &FieldSeries,
    f0: &Field,
    t_end: f64,
) -> Result<FieldSeries> {
    transport_with(
        advector,
        |t| coefficient.value_at(t),
        |t| forcing.at(t),
        f0,
        t_end,
    )
}

fn transport_with(
    advector: &FieldSeries,
    coefficient: impl Fn(f64) -> f64,
    forcing: impl Fn(f64) -> Result<Field>,
    f0: &Field,
    t_end: f64,
) -> Result<FieldSeries> {
    if !(t_end > 0.0) {
        return Err(Error::Precondition(format!(
            "T must be positive, got {t_end}"
        )));
    }
    f0.same_grid(&advector.fields[0])?;
    let times: Vec<f64> = advector
        .times
        .iter()
        .copied()
        .filter(|t| *t <= t_end * (1.0 + 1e-12))
        .collect();
    if times.first() != Some(&0.0) || (times.last().unwrap() - t_end).abs() > 1e-12 * t_end.max(1.0)
    {
        return Err(Error::Precondition(
            "advector must be sampled on [0, T]".into(),
        ));
    }
    let dx = f0.grid().dx();
    let rhs = |f: &Field, t: f64| -> Result<Field> {
        let a = advector.at(t)?;
        let (ad, _) = dynamics::truncated_pair(&a);
        let (_, fx) = dynamics::truncated_pair(f);
        let adv = ad.pointwise(&fx).scale(coefficient(t));
        Ok(forcing(t)?.sub(&adv))
    };
    let mut f = f0.clone();
    let mut out = vec![f.clone()];
    for k in 0..times.len() - 1 {
        let (t0, t1) = (times[k], times[k + 1]);
        let speed = (coefficient(t0) * advector.fields[k].max_abs())
            .abs()
            .max((coefficient(t1) * advector.fields[k + 1].max_abs()).abs());
        let substeps = if speed == 0.0 {
            1
        } else {
            ((t1 - t0) * speed / (TRANSPORT_CFL * dx)).ceil().max(1.0) as usize
        };
        let h = (t1 - t0) / substeps as f64;
        for j in 0..substeps {
            let t = t0 + j as f64 * h;
            let k1 = rhs(&f, t)?;
            let k2 = rhs(&f.axpy(0.5 * h, &k1), t + 0.5 * h)?;
            let k3 = rhs(&f.axpy(0.5 * h, &k2), t + 0.5 * h)?;
            let k4 = rhs(&f.axpy(h, &k3), t + h)?;
            f = f
                .axpy(h / 6.0, &k1)
                .axpy(h / 3.0, &k2)
                .axpy(h / 3.0, &k3)
                .axpy(h / 6.0, &k4);
        }
        if !f.is_finite() {
            return Err(Error::NonFinite { t: t1 });
        }
        out.push(f.clone());
    }
    FieldSeries::new(times, out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub n: usize,
    pub u: FieldSeries,
    pub sigma: FieldSeries,
    /// `H⁽ⁿ⁾(t) = ‖u⁽ⁿ⁾‖_{B^s} + ‖σ⁽ⁿ⁾‖_{B^{s-1}}` at the stored times.
    pub h_series: Vec<f64>,
    pub spec: BesovSpec,
}

impl IterateRecord {
    pub fn times(&self) -> &[f64] {
        &self.u.times
    }

    pub fn sup_h(&self) -> f64 {
        self.h_series.iter().copied().fold(0.0, f64::max)
    }

    pub fn state(&self, k: usize) -> State {
        State {
            u: self.u.fields[k].clone(),
            sigma: self.sigma.fields[k].clone(),
            t: self.u.times[k],
        }
    }

    fn new(n: usize, u: FieldSeries, sigma: FieldSeries, spec: BesovSpec) -> Result<Self> {
        let h_series: Vec<f64> = u
            .fields
            .iter()
            .zip(&sigma.fields)
            .map(|(a, b)| besov_norm(a, spec) + besov_norm(b, spec.with_s(spec.s - 1.0)))
            .collect();
        if h_series.iter().any(|h| !h.is_finite()) {
            return Err(Error::IterationUnstable { n });
        }
        Ok(Self {
            n,
            u,
            sigma,
            h_series,
            spec,
        })
    }
}

/// Runs iterates `1..=n_max` on `frames + 1` uniformly spaced times.
pub fn iterate(
    u0: &Field,
    sigma0: &Field,
    ps: &ParamSet,
    spec: BesovSpec,
    t_end: f64,
    n_max: usize,
    frames: usize,
) -> Result<Vec<IterateRecord>> {
    if n_max < 1 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    if !(t_end > 0.0) {
        return Err(Error::Precondition(format!(
            "T must be positive, got {t_end}"
        )));
    }
    if frames < 1 {
        return Err(Error::Precondition(
            "at least one frame interval is required".into(),
        ));
    }
    u0.same_grid(sigma0)?;
    let times = output_times(t_end, frames);
    let first = IterateRecord::new(
        1,
        FieldSeries::constant(&times, low_pass(u0, 1)?),
        FieldSeries::constant(&times, low_pass(sigma0, 1)?),
        spec,
    )?;
    let mut records = vec![first];
    for n in 1..n_max {
        let prev = records.last().expect("non-empty");
        let next = step(prev, u0, sigma0, ps, t_end, n).map_err(|e| match e {
            Error::NonFinite { .. } => Error::IterationUnstable { n: n + 1 },
            other => other,
        })?;
        records.push(next);
    }
    Ok(records)
}

/// Builds iterate `n + 1` from iterate `n`.
fn step(
    prev: &IterateRecord,
    u0: &Field,
    sigma0: &Field,
    ps: &ParamSet,
    t_end: f64,
    n: usize,
) -> Result<IterateRecord> {
    let q = (n + 1) as i32;
    let prev_state = |t: f64| -> Result<State> {
        Ok(State {
            u: prev.u.at(t)?,
            sigma: prev.sigma.at(t)?,
            t,
        })
    };
    let u_forcing = |t: f64| -> Result<Field> {
        Ok(dynamics::non_transport_terms(&prev_state(t)?, ps.coefficients_at(t)).du)
    };
    let sigma_forcing = |t: f64| -> Result<Field> {
        Ok(dynamics::non_transport_terms(&prev_state(t)?, ps.coefficients_at(t)).dsigma)
    };
    let u_next = transport_with(
        &prev.u,
        |t| ps.alpha.value_at(t),
        u_forcing,
        &low_pass(u0, q)?,
        t_end,
    )?;
    let sigma_next = transport_with(
        &prev.u,
        |t| ps.xi.value_at(t),
        sigma_forcing,
        &low_pass(sigma0, q)?,
        t_end,
    )?;
    IterateRecord::new(n + 1, u_next, sigma_next, prev.spec)
}

/// Difference norm `‖δu‖_{B^{s-1}} + ‖δσ‖_{B^{s-2}}`.
pub fn difference_norm(du: &Field, dsigma: &Field, spec: BesovSpec) -> f64 {
    besov_norm(du, spec.with_s(spec.s - 1.0)) + besov_norm(dsigma, spec.with_s(spec.s - 2.0))
}

/// `sup_t 𝓗⁽ⁿ,ᵐ⁾(t)` for every `n` with both `n` and `n + m` available.
/// Entry `i` corresponds to `n = records[i].n`.
pub fn cauchy_differences(records: &[IterateRecord], m: usize) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::IndexOutOfRange("m must be at least 1".into()));
    }
    if records.len() <= m {
        return Err(Error::IndexOutOfRange(format!(
            "need more than {m} iterates, have {}",
            records.len()
        )));
    }
    Ok((0..records.len() - m)
        .map(|i| sup_difference(&records[i], &records[i + m]))
        .collect())
}

fn sup_difference(a: &IterateRecord, b: &IterateRecord) -> f64 {
    (0..a.u.fields.len())
        .map(|k| {
            difference_norm(
                &a.u.fields[k].sub(&b.u.fields[k]),
                &a.sigma.fields[k].sub(&b.sigma.fields[k]),
                a.spec,
            )
        })
        .fold(0.0, f64::max)
}

/// `sup_t` of the difference norm between an iterate and a reference
/// trajectory (e.g. simulation frames), interpolated to the iterate's times.
pub fn distance_to_trajectory(record: &IterateRecord, reference: &[State]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, &t) in record.times().iter().enumerate() {
        let r = dynamics::interpolate_states(reference, t)?;
        worst = worst.max(difference_norm(
            &record.u.fields[k].sub(&r.u),
            &record.sigma.fields[k].sub(&r.sigma),
            record.spec,
        ));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_advection_keeps_data() {
        let g = Grid::periodic(32).unwrap();
        let times = output_times(1.0, 10);
        let a = FieldSeries::constant(&times, Field::zeros(g));
        let f0 = Field::from_fn(g, |x| x.sin() + 0.3 * (3.0 * x).cos());
        let out = linear_transport_solve(&a, &ParamFn::constant(1.0), &a, &f0, 1.0).unwrap();
        assert!(out.fields.iter().all(|f| f.sub(&f0).max_abs() < 1e-15));
    }

    #[test]
    fn zero_data_gives_zero_iterates() {
        let g = Grid::periodic(32).unwrap();
        let z = Field::zeros(g);
        let ps = ParamSet::damped_preset(2.0, 1.0, 0.5).unwrap();
        let recs = iterate(&z, &z, &ps, BesovSpec::sobolev(2.0), 1.0, 3, 20).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| r.sup_h() == 0.0));
        assert!(cauchy_differences(&recs, 1)
            .unwrap()
            .iter()
            .all(|d| *d == 0.0));
        assert!(cauchy_differences(&recs, 3).is_err());
    }

    #[test]
    fn series_interpolation() {
        let g = Grid::periodic(16).unwrap();
        let s = FieldSeries::new(
            vec![0.0, 1.0],
            vec![Field::zeros(g), Field::constant(g, 2.0)],
        )
        .unwrap();
        assert!((s.at(0.25).unwrap().values()[3] - 0.5).abs() < 1e-15);
        assert!(s.at(1.5).is_err());
    }
}
