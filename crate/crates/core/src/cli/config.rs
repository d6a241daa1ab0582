//! Flat `key = value` run configuration.
//!
//! Keys use dotted section prefixes (`grid.n`, `data.u.preset`, `step.cfl`).
//! Blank lines and `#` comments are ignored. Every key must be consumed by
//! the selected scenario and presets; leftovers are reported by name.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::RhsForm;
use crate::initial_data::Profile;
use crate::integrator::StepControl;
use crate::littlewood_paley::BesovSpec;
use crate::params::{ParamFn, ParamSet};
use crate::spectral::Grid;
use crate::theory::TheoryConfig;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key \"{key}\"")]
    UnknownKey { key: String, line: usize },
    #[error("missing required key \"{key}\"")]
    Missing { key: String },
    #[error("invalid value for \"{key}\": {msg}")]
    Invalid { key: String, msg: String },
}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Simulate,
    TransformCheck,
    Friedrichs,
    BlowupScan,
    Norms,
    BoundsReport,
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "simulate" => Self::Simulate,
            "transform-check" => Self::TransformCheck,
            "friedrichs" => Self::Friedrichs,
            "blowup-scan" => Self::BlowupScan,
            "norms" => Self::Norms,
            "bounds-report" => Self::BoundsReport,
            _ => {
                return Err(format!(
                    "unknown scenario {s:?} (expected simulate, transform-check, friedrichs, \
                     blowup-scan, norms or bounds-report)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

/// Coefficient specification as written in the config.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum ParamsConfig {
    Coefficients {
        alpha: ParamFn,
        beta: ParamFn,
        gamma: ParamFn,
        xi: ParamFn,
        damping: f64,
    },
    BFamily {
        b: f64,
        kappa: f64,
    },
    /// Coefficients `e^{-2λt}·(1, b, κ, 1)`.
    Damped {
        b: f64,
        kappa: f64,
        lambda: f64,
    },
    WeaklyDissipative {
        b: f64,
        kappa: f64,
        lambda: f64,
    },
}

impl ParamsConfig {
    pub fn build(&self) -> crate::Result<ParamSet> {
        match self {
            ParamsConfig::Coefficients {
                alpha,
                beta,
                gamma,
                xi,
                damping,
            } => {
                let mut ps = ParamSet::new(alpha.clone(), beta.clone(), gamma.clone(), xi.clone());
                ps.damping = *damping;
                Ok(ps)
            }
            ParamsConfig::BFamily { b, kappa } => Ok(ParamSet::b_family(*b, *kappa)),
            ParamsConfig::Damped { b, kappa, lambda } => {
                ParamSet::damped_preset(*b, *kappa, *lambda)
            }
            ParamsConfig::WeaklyDissipative { b, kappa, lambda } => {
                ParamSet::weakly_dissipative(*b, *kappa, *lambda)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputConfig {
    pub frames: bool,
    pub traces: bool,
    pub trace_seeds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformConfig {
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FriedrichsConfig {
    /// Last iterate compared with the nonlinear run; one more is computed
    /// so that the difference `𝓗^(n_max, 1)` is available.
    pub n_max: usize,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    /// Multipliers applied to the velocity data, one run each.
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub grid: GridConfig,
    pub u0: Profile,
    pub sigma0: Profile,
    pub params: ParamsConfig,
    pub t_end: f64,
    pub step: StepControl,
    pub besov: BesovSpec,
    pub theory: TheoryConfig,
    pub output: OutputConfig,
    pub transform: TransformConfig,
    pub friedrichs: FriedrichsConfig,
    pub scan: ScanConfig,
    pub seed: u64,
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.grid.n, self.grid.length).expect("validated at parse time")
    }
}

const PROFILE_FIELDS: &[&str] = &[
    "preset",
    "amplitude",
    "width",
    "center",
    "wavenumber",
    "sharpness",
    "value",
    "values",
    "kmax",
    "decay",
    "seed",
];

/// Every key any scenario may read, except the per-profile `data.*` fields.
const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "grid.n",
    "grid.length",
    "params.preset",
    "params.alpha",
    "params.beta",
    "params.gamma",
    "params.xi",
    "params.damping",
    "params.b",
    "params.kappa",
    "params.lambda",
    "time.t_end",
    "step.dt_init",
    "step.cfl",
    "step.dt_min",
    "step.blowup_slope_threshold",
    "step.norm_guard",
    "step.output_interval",
    "step.rhs",
    "besov.s",
    "besov.p",
    "besov.r",
    "theory.c",
    "output.frames",
    "output.traces",
    "output.trace_seeds",
    "transform.tolerance",
    "friedrichs.n_max",
    "friedrichs.frames",
    "scan.scales",
];

fn is_known_key(key: &str) -> bool {
    if KNOWN_KEYS.contains(&key) {
        return true;
    }
    ["data.u.", "data.sigma."].iter().any(|p| {
        key.strip_prefix(p)
            .is_some_and(|f| PROFILE_FIELDS.contains(&f))
    })
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Doc {
    entries: BTreeMap<String, Entry>,
}

impl Doc {
    fn parse(text: &str) -> CResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("expected `key = value`, got {content:?}"),
                });
            };
            let key = key.trim();
            let valid = !key.is_empty()
                && key.split('.').all(|part| {
                    !part.is_empty()
                        && part
                            .chars()
                            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                });
            if !valid {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("malformed key {key:?}"),
                });
            }
            let value = value.trim();
            if value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("empty value for \"{key}\""),
                });
            }
            let entry = Entry {
                line,
                value: value.to_string(),
                used: false,
            };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return Err(ConfigError::Parse {
                    line,
                    msg: format!("duplicate key \"{key}\" (first set on line {})", prev.line),
                });
            }
        }
        // Report misspelled keys before anything else so a typo is not
        // mistaken for a missing key.
        if let Some((key, e)) = entries
            .iter()
            .filter(|(k, _)| !is_known_key(k))
            .min_by_key(|(_, e)| e.line)
        {
            return Err(ConfigError::UnknownKey {
                key: key.clone(),
                line: e.line,
            });
        }
        Ok(Self { entries })
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            e.value.clone()
        })
    }

    fn get<T: FromStr>(&mut self, key: &str) -> CResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| invalid(key, e)),
        }
    }

    fn or<T: FromStr>(&mut self, key: &str, default: T) -> CResult<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&mut self, key: &str) -> CResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| ConfigError::Missing { key: key.into() })
    }

    fn float(&mut self, key: &str, default: f64) -> CResult<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_float(&v).map_err(|e| invalid(key, e)),
        }
    }

    fn required_float(&mut self, key: &str) -> CResult<f64> {
        match self.raw(key) {
            None => Err(ConfigError::Missing { key: key.into() }),
            Some(v) => parse_float(&v).map_err(|e| invalid(key, e)),
        }
    }

    fn param_fn(&mut self, key: &str, default: f64) -> CResult<ParamFn> {
        match self.raw(key) {
            None => Ok(ParamFn::constant(default)),
            Some(v) => parse_param_fn(&v).map_err(|e| invalid(key, e)),
        }
    }

    fn finish(self) -> CResult<()> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            Some((key, e)) => Err(ConfigError::UnknownKey {
                key: key.clone(),
                line: e.line,
            }),
            None => Ok(()),
        }
    }
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        msg: msg.to_string(),
    }
}

/// Finite float, `inf`, or `pi`/`2pi` shorthands.
fn parse_float(v: &str) -> Result<f64, String> {
    match v {
        "inf" | "infinity" => Ok(f64::INFINITY),
        "pi" => Ok(PI),
        "2pi" => Ok(2.0 * PI),
        _ => {
            let x: f64 = v
                .parse()
                .map_err(|_| format!("expected a number, got {v:?}"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("expected a finite number, got {v:?}"))
            }
        }
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|x| parse_float(x.trim())).collect()
}

/// `1.5`, `damped-exp(scale, lambda)` or `table(t0:v0, t1:v1, ...)`.
fn parse_param_fn(v: &str) -> Result<ParamFn, String> {
    let call = |name: &str| {
        v.strip_prefix(name)
            .and_then(|r| r.trim_start().strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
    };
    if let Some(args) = call("damped-exp") {
        let xs = parse_list(args)?;
        let [scale, lambda] = xs[..] else {
            return Err(format!("damped-exp takes two arguments, got {}", xs.len()));
        };
        ParamFn::damped_exp(scale, lambda).map_err(|e| e.to_string())
    } else if let Some(args) = call("table") {
        let (mut ts, mut vs) = (vec![], vec![]);
        for pair in args.split(',') {
            let (t, x) = pair
                .split_once(':')
                .ok_or_else(|| format!("table entries are `t:value`, got {:?}", pair.trim()))?;
            ts.push(parse_float(t.trim())?);
            vs.push(parse_float(x.trim())?);
        }
        ParamFn::tabulated(ts, vs).map_err(|e| e.to_string())
    } else {
        parse_float(v).map(ParamFn::constant)
    }
}

fn parse_bool(key: &str, v: Option<String>, default: bool) -> CResult<bool> {
    match v.as_deref() {
        None => Ok(default),
        Some("true" | "yes" | "on") => Ok(true),
        Some("false" | "no" | "off") => Ok(false),
        Some(other) => Err(invalid(
            key,
            format!("expected true or false, got {other:?}"),
        )),
    }
}

fn profile(doc: &mut Doc, prefix: &str, required: bool, seed: u64) -> CResult<Profile> {
    let key = |k: &str| format!("{prefix}.{k}");
    let preset: Option<String> = doc.get(&key("preset"))?;
    let preset = match preset {
        Some(p) => p,
        None if required => return Err(ConfigError::Missing { key: key("preset") }),
        None => "zero".into(),
    };
    let p = match preset.as_str() {
        "zero" => Profile::Zero,
        "constant" => Profile::Constant {
            value: doc.required_float(&key("value"))?,
        },
        "gaussian-bump" => Profile::GaussianBump {
            amplitude: doc.required_float(&key("amplitude"))?,
            width: doc.float(&key("width"), 1.0)?,
            center: doc.float(&key("center"), PI)?,
        },
        "sine" => Profile::Sine {
            amplitude: doc.required_float(&key("amplitude"))?,
            wavenumber: doc.float(&key("wavenumber"), 1.0)?,
        },
        "peakon-smooth" => Profile::PeakonSmooth {
            amplitude: doc.required_float(&key("amplitude"))?,
            sharpness: doc.float(&key("sharpness"), 10.0)?,
            center: doc.float(&key("center"), PI)?,
        },
        "tabulated" => {
            let raw = doc
                .raw(&key("values"))
                .ok_or_else(|| ConfigError::Missing { key: key("values") })?;
            Profile::Tabulated {
                values: parse_list(&raw).map_err(|e| invalid(&key("values"), e))?,
            }
        }
        "random-band" => Profile::RandomBand {
            amplitude: doc.required_float(&key("amplitude"))?,
            kmax: doc.or(&key("kmax"), 8)?,
            decay: doc.float(&key("decay"), 2.0)?,
            seed: doc.or(&key("seed"), seed)?,
        },
        other => {
            return Err(invalid(
                &key("preset"),
                format!(
                    "unknown preset {other:?} (expected zero, constant, gaussian-bump, sine, \
                     peakon-smooth, tabulated or random-band)"
                ),
            ))
        }
    };
    p.validate().map_err(|e| invalid(&key("preset"), e))?;
    Ok(p)
}

fn params(doc: &mut Doc) -> CResult<ParamsConfig> {
    let preset: String = doc.or("params.preset", "coefficients".to_string())?;
    let cfg = match preset.as_str() {
        "coefficients" => ParamsConfig::Coefficients {
            alpha: doc.param_fn("params.alpha", 1.0)?,
            beta: doc.param_fn("params.beta", 2.0)?,
            gamma: doc.param_fn("params.gamma", 1.0)?,
            xi: doc.param_fn("params.xi", 1.0)?,
            damping: doc.float("params.damping", 0.0)?,
        },
        "b-family" => ParamsConfig::BFamily {
            b: doc.float("params.b", 2.0)?,
            kappa: doc.float("params.kappa", 1.0)?,
        },
        "damped" => ParamsConfig::Damped {
            b: doc.float("params.b", 2.0)?,
            kappa: doc.float("params.kappa", 1.0)?,
            lambda: doc.required_float("params.lambda")?,
        },
        "weakly-dissipative" => ParamsConfig::WeaklyDissipative {
            b: doc.float("params.b", 2.0)?,
            kappa: doc.float("params.kappa", 1.0)?,
            lambda: doc.required_float("params.lambda")?,
        },
        other => {
            return Err(invalid(
                "params.preset",
                format!(
                    "unknown preset {other:?} (expected coefficients, b-family, damped or \
                     weakly-dissipative)"
                ),
            ))
        }
    };
    cfg.build().map_err(|e| invalid("params", e))?;
    Ok(cfg)
}

fn step(doc: &mut Doc) -> CResult<StepControl> {
    let d = StepControl::default();
    let rhs = match doc.raw("step.rhs").as_deref() {
        None => d.rhs,
        Some("nonlocal") => RhsForm::Nonlocal,
        Some("momentum") => RhsForm::Momentum,
        Some(other) => {
            return Err(invalid(
                "step.rhs",
                format!("expected nonlocal or momentum, got {other:?}"),
            ))
        }
    };
    let ctrl = StepControl {
        dt_init: doc.float("step.dt_init", d.dt_init)?,
        cfl: doc.float("step.cfl", d.cfl)?,
        dt_min: doc.float("step.dt_min", d.dt_min)?,
        blowup_slope_threshold: doc
            .float("step.blowup_slope_threshold", d.blowup_slope_threshold)?,
        norm_guard: doc.float("step.norm_guard", d.norm_guard)?,
        output_interval: doc.float("step.output_interval", d.output_interval)?,
        rhs,
    };
    ctrl.validate().map_err(|e| invalid("step", e))?;
    Ok(ctrl)
}

/// Parses and validates a configuration document. `seed` fills in any
/// random-band profile that does not set its own.
pub fn parse_config(text: &str, seed: u64) -> CResult<RunConfig> {
    let mut doc = Doc::parse(text)?;
    let scenario: Scenario = doc.required("scenario")?;

    let n: usize = doc.required("grid.n")?;
    let length = doc.float("grid.length", 2.0 * PI)?;
    Grid::new(n, length).map_err(|e| invalid("grid", e))?;

    let u0 = profile(&mut doc, "data.u", true, seed)?;
    let sigma0 = profile(&mut doc, "data.sigma", false, seed)?;
    for (key, p) in [("data.u.values", &u0), ("data.sigma.values", &sigma0)] {
        if let Profile::Tabulated { values } = p {
            if values.len() != n {
                return Err(invalid(
                    key,
                    format!("{} samples for a grid of {n}", values.len()),
                ));
            }
        }
    }

    let params = params(&mut doc)?;
    let t_end = doc.float("time.t_end", 1.0)?;
    if !(t_end > 0.0) {
        return Err(invalid("time.t_end", "must be positive"));
    }
    let step = step(&mut doc)?;

    let besov = BesovSpec::new(
        doc.float("besov.s", 2.0)?,
        doc.float("besov.p", 2.0)?,
        doc.float("besov.r", 2.0)?,
    )
    .map_err(|e| invalid("besov", e))?;
    let theory = TheoryConfig {
        c: doc.float("theory.c", 1.0)?,
        s: besov.s,
    };
    // Norm tables make sense at any regularity; everything else runs the
    // solver or the theorem checks, which need s > 3/2.
    if scenario == Scenario::Norms {
        if !(theory.c > 0.0) {
            return Err(invalid("theory.c", "must be positive"));
        }
    } else {
        theory.validate().map_err(|e| invalid("besov.s", e))?;
    }

    let output = OutputConfig {
        frames: parse_bool("output.frames", doc.raw("output.frames"), false)?,
        traces: parse_bool("output.traces", doc.raw("output.traces"), false)?,
        trace_seeds: doc.or("output.trace_seeds", 64)?,
    };
    if output.trace_seeds < 3 {
        return Err(invalid("output.trace_seeds", "at least 3 seeds are needed"));
    }

    let transform = TransformConfig {
        tolerance: doc.float("transform.tolerance", 1e-5)?,
    };
    if !(transform.tolerance > 0.0) {
        return Err(invalid("transform.tolerance", "must be positive"));
    }
    if scenario == Scenario::TransformCheck
        && !matches!(params, ParamsConfig::WeaklyDissipative { .. })
    {
        return Err(invalid(
            "params.preset",
            "transform-check needs the weakly-dissipative preset",
        ));
    }

    let friedrichs = FriedrichsConfig {
        n_max: doc.or("friedrichs.n_max", 10)?,
        frames: doc.or("friedrichs.frames", crate::friedrichs::DEFAULT_FRAMES)?,
    };
    if friedrichs.n_max < 1 {
        return Err(invalid("friedrichs.n_max", "must be at least 1"));
    }
    if friedrichs.frames < 1 {
        return Err(invalid("friedrichs.frames", "must be at least 1"));
    }

    let scales = match doc.raw("scan.scales") {
        None => vec![1.0],
        Some(v) => parse_list(&v).map_err(|e| invalid("scan.scales", e))?,
    };
    if scales.is_empty() {
        return Err(invalid("scan.scales", "needs at least one entry"));
    }

    doc.finish()?;
    Ok(RunConfig {
        scenario,
        grid: GridConfig { n, length },
        u0,
        sigma0,
        params,
        t_end,
        step,
        besov,
        theory,
        output,
        transform,
        friedrichs,
        scan: ScanConfig { scales },
        seed,
    })
}
