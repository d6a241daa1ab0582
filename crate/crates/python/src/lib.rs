//! Python bindings: grids, fields, coefficient sets, the time stepper and
//! the config-driven scenarios.

use std::path::PathBuf;

use bfamily_core::littlewood_paley::{self as lp, BesovSpec};
use bfamily_core::{cli, spectral, theory};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyGrid(bfamily_core::Grid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (n, length = 2.0 * std::f64::consts::PI))]
    fn new(n: usize, length: f64) -> PyResult<Self> {
        bfamily_core::Grid::new(n, length).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n_points()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.0.length()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn points(&self) -> Vec<f64> {
        self.0.points().collect()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, length={})", self.0.n_points(), self.0.length())
    }
}

#[pyclass(name = "Field", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyField(bfamily_core::Field);

#[pymethods]
impl PyField {
    #[new]
    fn new(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        bfamily_core::Field::new(grid.0, values)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn zeros(grid: &PyGrid) -> Self {
        Self(bfamily_core::Field::zeros(grid.0))
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid())
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.values().len()
    }

    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    fn derivative(&self) -> Self {
        Self(spectral::derivative(&self.0))
    }

    #[pyo3(signature = (shift = 1.0))]
    fn helmholtz_inverse(&self, shift: f64) -> PyResult<Self> {
        spectral::helmholtz_inverse(&self.0, shift)
            .map(Self)
            .map_err(err)
    }

    fn low_pass(&self, q: i32) -> PyResult<Self> {
        lp::low_pass(&self.0, q).map(Self).map_err(err)
    }

    #[pyo3(signature = (s, p = 2.0, r = 2.0))]
    fn besov_norm(&self, s: f64, p: f64, r: f64) -> PyResult<f64> {
        Ok(lp::besov_norm(
            &self.0,
            BesovSpec::new(s, p, r).map_err(err)?,
        ))
    }

    fn sobolev_norm(&self, s: f64) -> f64 {
        lp::sobolev_norm(&self.0, s)
    }
}

#[pyclass(name = "ParamSet", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyParamSet(bfamily_core::ParamSet);

#[pymethods]
impl PyParamSet {
    #[staticmethod]
    fn constant(alpha: f64, beta: f64, gamma: f64, xi: f64) -> Self {
        Self(bfamily_core::ParamSet::constant(alpha, beta, gamma, xi))
    }

    #[staticmethod]
    fn b_family(b: f64, kappa: f64) -> Self {
        Self(bfamily_core::ParamSet::b_family(b, kappa))
    }

    /// Coefficients `e^{-2λt}·(1, b, κ, 1)`.
    #[staticmethod]
    fn damped(b: f64, kappa: f64, lambda: f64) -> PyResult<Self> {
        bfamily_core::ParamSet::damped_preset(b, kappa, lambda)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn weakly_dissipative(b: f64, kappa: f64, lambda: f64) -> PyResult<Self> {
        bfamily_core::ParamSet::weakly_dissipative(b, kappa, lambda)
            .map(Self)
            .map_err(err)
    }

    /// `(alpha, beta, gamma, xi)` at time `t`.
    fn coefficients(&self, t: f64) -> PyResult<(f64, f64, f64, f64)> {
        let c = self.0.eval(t).map_err(err)?;
        Ok((c.alpha, c.beta, c.gamma, c.xi))
    }

    fn total_mass(&self, t: f64) -> PyResult<f64> {
        self.0.total_mass(t).map_err(err)
    }
}

/// Runs the RK4 solver and returns a dict with the verdict, the stored
/// frames and the per-step diagnostics.
#[pyfunction]
#[pyo3(signature = (u0, sigma0, params, t_end, dt_init = 1e-2, cfl = 0.3, output_interval = 0.1, s = 2.0))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    u0: &PyField,
    sigma0: &PyField,
    params: &PyParamSet,
    t_end: f64,
    dt_init: f64,
    cfl: f64,
    output_interval: f64,
    s: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let state = bfamily_core::State::new(u0.0.clone(), sigma0.0.clone(), 0.0).map_err(err)?;
    let ctrl = bfamily_core::StepControl {
        dt_init,
        cfl,
        output_interval,
        ..Default::default()
    };
    let r = py
        .detach(|| bfamily_core::simulate(&state, &params.0, t_end, &ctrl, s))
        .map_err(err)?;
    let out = PyDict::new(py);
    let (kind, t) = match r.verdict {
        bfamily_core::Verdict::Completed => ("completed", None),
        bfamily_core::Verdict::BlewUp { t } => ("blew_up", Some(t)),
        bfamily_core::Verdict::StepUnderflow { t } => ("step_underflow", Some(t)),
        bfamily_core::Verdict::NonFinite { t } => ("non_finite", Some(t)),
    };
    out.set_item("verdict", kind)?;
    out.set_item("verdict_time", t)?;
    out.set_item("times", r.frames.iter().map(|f| f.t).collect::<Vec<_>>())?;
    out.set_item(
        "u",
        r.frames
            .iter()
            .map(|f| PyField(f.u.clone()))
            .collect::<Vec<_>>(),
    )?;
    out.set_item(
        "sigma",
        r.frames
            .iter()
            .map(|f| PyField(f.sigma.clone()))
            .collect::<Vec<_>>(),
    )?;
    let series = PyDict::new(py);
    let col = |f: fn(&bfamily_core::integrator::SeriesRecord) -> f64| {
        r.series.iter().map(f).collect::<Vec<_>>()
    };
    series.set_item("t", col(|x| x.t))?;
    series.set_item("hs_u", col(|x| x.hs_u))?;
    series.set_item("hs_sigma", col(|x| x.hs_sigma))?;
    series.set_item("l2_u", col(|x| x.l2_u))?;
    series.set_item("linf_u", col(|x| x.linf_u))?;
    series.set_item("inf_ux", col(|x| x.inf_ux))?;
    series.set_item("sup_ux", col(|x| x.sup_ux))?;
    series.set_item("m_chi", col(|x| x.m_chi))?;
    out.set_item("series", series)?;
    Ok(out)
}

/// `Σ_{k=0}^{n} a_{n-k} m^k / k! + g₀ m^{n+1} / (n+1)!`.
#[pyfunction]
fn lemma32_bound(a_seq: Vec<f64>, mass: f64, g0: f64, n: usize) -> PyResult<f64> {
    theory::lemma32_bound(&a_seq, mass, g0, n).map_err(err)
}

/// Parses a config document and runs its scenario into `out`.
/// Returns `(exit_code, summary_json)`.
#[pyfunction]
#[pyo3(signature = (text, out, seed = 0))]
fn run_config(py: Python<'_>, text: &str, out: PathBuf, seed: u64) -> PyResult<(i32, String)> {
    let cfg = cli::parse_config(text, seed).map_err(err)?;
    let outcome = py.detach(|| cli::run(&cfg, &out)).map_err(err)?;
    Ok((outcome.status.code(), outcome.summary.to_string()))
}

#[pymodule]
fn bfamily(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyParamSet>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(lemma32_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
