//! Closed-form theorem quantities: smallness conditions, blow-up time lower
//! bound, iteration bounds and the a priori bounds checked along a run.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::integrator::SimResult;
use crate::littlewood_paley::{besov_norm, sobolev_norm, BesovSpec};
use crate::params::ParamSet;
use crate::spectral::Field;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig {
    /// Generic constant of the a priori estimates.
    pub c: f64,
    pub s: f64,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self { c: 1.0, s: 2.0 }
    }
}

impl TheoryConfig {
    pub fn new(c: f64, s: f64) -> Result<Self> {
        let cfg = Self { c, s };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.s > 1.5) {
            return Err(Error::Hypothesis(format!("s = {} must exceed 3/2", self.s)));
        }
        Ok(())
    }
}

/// Scalar verdict of a smallness condition `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub satisfied: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; at most 1 when the condition holds.
    pub ratio: f64,
    /// Set for the zero-data case where the right side is `+∞` by convention.
    pub degenerate: bool,
}

const CONDITION_SLACK: f64 = 1e-12;

impl ConditionCheck {
    fn compare(lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self {
            satisfied: lhs <= rhs * (1.0 + CONDITION_SLACK),
            lhs,
            rhs,
            ratio,
            degenerate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub times: Vec<f64>,
    pub bound: Vec<f64>,
    pub observed: Vec<f64>,
    pub satisfied: bool,
    /// Smallest `bound / observed` over `t > 0` with `observed > 0`.
    pub margin: f64,
}

/// Relative slack when comparing simulated norms against analytic bounds.
pub const BOUND_SLACK: f64 = 1e-9;

impl BoundReport {
    pub fn new(name: &str, times: Vec<f64>, bound: Vec<f64>, observed: Vec<f64>) -> Self {
        let mut satisfied = true;
        let mut margin = f64::INFINITY;
        for ((&t, &b), &o) in times.iter().zip(&bound).zip(&observed) {
            if o > b * (1.0 + BOUND_SLACK) + f64::MIN_POSITIVE {
                satisfied = false;
            }
            if t > times[0] && o > 0.0 {
                margin = margin.min(b / o);
            }
        }
        Self {
            name: name.to_string(),
            times,
            bound,
            observed,
            satisfied,
            margin,
        }
    }
}

/// `‖u₀‖_{B^s} + ‖σ₀‖_{B^{s-1}}`.
pub fn data_norm(u0: &Field, sigma0: &Field, spec: BesovSpec) -> f64 {
    besov_norm(u0, spec) + besov_norm(sigma0, spec.with_s(spec.s - 1.0))
}

/// `‖u₀‖_{H^s} + ‖σ₀‖_{H^{s-1}}`.
pub fn sobolev_data_norm(u0: &Field, sigma0: &Field, s: f64) -> f64 {
    sobolev_norm(u0, s) + sobolev_norm(sigma0, s - 1.0)
}

/// `h(x) = e^{2C²x∫(|α|+|ξ|)} (x + 4C²x² ∫(|α|+|β|+|γ|+|ξ|))`.
pub fn h_modulus(x: f64, ps: &ParamSet, cfg: &TheoryConfig) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "h is defined on [0, ∞), got {x}"
        )));
    }
    let ax = ps.alpha.l1_mass(f64::INFINITY)? + ps.xi.l1_mass(f64::INFINITY)?;
    let all = ps.total_mass(f64::INFINITY)?;
    Ok(h_from_masses(x, ax, all, cfg.c))
}

fn h_from_masses(x: f64, alpha_xi: f64, all: f64, c: f64) -> f64 {
    let c2 = c * c;
    (2.0 * c2 * x * alpha_xi).exp() * (x + 4.0 * c2 * x * x * all)
}

fn check_besov_hypothesis(spec: BesovSpec) -> Result<()> {
    let floor = (1.0 + 1.0 / spec.p).max(1.5);
    if !(spec.s > floor) {
        return Err(Error::Hypothesis(format!(
            "s = {} must exceed max(1 + 1/p, 3/2) = {floor}",
            spec.s
        )));
    }
    Ok(())
}

/// `∫₀^∞ (|α|+|β|+|γ|+|ξ|) <= ln 2 / (6 C² h(H₀))`.
pub fn theorem11_check(
    u0: &Field,
    sigma0: &Field,
    spec: BesovSpec,
    ps: &ParamSet,
    cfg: &TheoryConfig,
) -> Result<ConditionCheck> {
    check_besov_hypothesis(spec)?;
    u0.same_grid(sigma0)?;
    let h0 = data_norm(u0, sigma0, spec);
    let lhs = ps.total_mass(f64::INFINITY)?;
    let h = h_modulus(h0, ps, cfg)?;
    if h == 0.0 {
        return Ok(ConditionCheck {
            satisfied: true,
            lhs,
            rhs: f64::INFINITY,
            ratio: 0.0,
            degenerate: true,
        });
    }
    Ok(ConditionCheck::compare(
        lhs,
        LN_2 / (6.0 * cfg.c * cfg.c * h),
    ))
}

/// `λ_min = 8C²(2+|b|+|κ|)(‖u₀‖_{B^s} + ‖σ₀‖_{B^{s-1}}) / ln 2`.
pub fn remark14_lambda_min(
    u0: &Field,
    sigma0: &Field,
    spec: BesovSpec,
    b: f64,
    kappa: f64,
    cfg: &TheoryConfig,
) -> f64 {
    lambda_min_for_norm(data_norm(u0, sigma0, spec), b, kappa, cfg)
}

pub fn lambda_min_for_norm(h0: f64, b: f64, kappa: f64, cfg: &TheoryConfig) -> f64 {
    8.0 * cfg.c * cfg.c * (2.0 + b.abs() + kappa.abs()) * h0 / LN_2
}

/// `e^{2C²H/λ}(H + 2C²A H²/λ) <= λ ln 2 / (3C²A)` with `A = 2+|b|+|κ|`.
pub fn theorem13_check(
    u0: &Field,
    sigma0: &Field,
    spec: BesovSpec,
    b: f64,
    kappa: f64,
    lambda: f64,
    cfg: &TheoryConfig,
) -> Result<ConditionCheck> {
    theorem13_for_norm(data_norm(u0, sigma0, spec), b, kappa, lambda, cfg)
}

pub fn theorem13_for_norm(
    h0: f64,
    b: f64,
    kappa: f64,
    lambda: f64,
    cfg: &TheoryConfig,
) -> Result<ConditionCheck> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParam(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let c2 = cfg.c * cfg.c;
    let a = 2.0 + b.abs() + kappa.abs();
    let lhs = if h0 == 0.0 {
        0.0
    } else {
        (2.0 * c2 * h0 / lambda).exp() * (h0 + 2.0 * c2 * a * h0 * h0 / lambda)
    };
    Ok(ConditionCheck::compare(lhs, lambda * LN_2 / (3.0 * c2 * a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupLowerBound {
    /// Lower bound on the maximal existence time; `+∞` when `global`.
    pub time: f64,
    /// The cumulative mass never reaches the threshold: the solution is global.
    pub global: bool,
    /// `1 / (C (‖u₀‖_{H^s} + ‖σ₀‖_{H^{s-1}}))`.
    pub threshold: f64,
}

/// `sup { t : ∫₀ᵗ (|α|+|γ|+|ξ|) <= 1/(C(‖u₀‖_{H^s}+‖σ₀‖_{H^{s-1}})) }`.
pub fn blowup_lower_bound(
    u0: &Field,
    sigma0: &Field,
    s: f64,
    ps: &ParamSet,
    cfg: &TheoryConfig,
) -> Result<BlowupLowerBound> {
    if !(s > 1.5) {
        return Err(Error::Hypothesis(format!("s = {s} must exceed 3/2")));
    }
    let norm = sobolev_data_norm(u0, sigma0, s);
    let threshold = if norm == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (cfg.c * norm)
    };
    let global = BlowupLowerBound {
        time: f64::INFINITY,
        global: true,
        threshold,
    };
    match ps.blowup_mass(f64::INFINITY) {
        Ok(total) if total <= threshold => return Ok(global),
        Ok(_) | Err(Error::DivergentMass(_)) => {}
        Err(e) => return Err(e),
    }
    if threshold.is_infinite() {
        return Ok(global);
    }
    let mut hi = 1.0;
    while ps.blowup_mass(hi)? <= threshold {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(global);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ps.blowup_mass(mid)? <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BlowupLowerBound {
        time: lo,
        global: false,
        threshold,
    })
}

/// `Σ_{k=0}^{n} a_{n-k} m^k / k! + g₀ m^{n+1} / (n+1)!`.
pub fn lemma32_bound(a_seq: &[f64], mu_mass: f64, g0: f64, n: usize) -> Result<f64> {
    if a_seq.len() < n + 1 {
        return Err(Error::Precondition(format!(
            "lemma32_bound needs {} sequence entries, got {}",
            n + 1,
            a_seq.len()
        )));
    }
    if a_seq.iter().any(|a| *a < 0.0) || mu_mass < 0.0 || g0 < 0.0 {
        return Err(Error::Precondition(
            "lemma32_bound inputs must be nonnegative".into(),
        ));
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..=n {
        if k > 0 {
            term *= mu_mass / k as f64;
        }
        sum += a_seq[n - k] * term;
    }
    term *= mu_mass / (n + 1) as f64;
    Ok(sum + g0 * term)
}

/// `(m, χ)_{L²}` with `χ = (4 − ∂_x²)^{-1} u`, i.e. `L Σ (1+k²)/(4+k²) |û_k|²`.
pub fn m_chi_functional(s: &State) -> f64 {
    let grid = s.grid();
    let spec = s.u.spectrum();
    let sum: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let k2 = grid.wavenumber(j).powi(2);
            (1.0 + k2) / (4.0 + k2) * c.norm_sqr()
        })
        .sum();
    grid.length() * sum
}

fn require_beta_three_alpha(result: &SimResult, ps: &ParamSet) -> Result<()> {
    let times: Vec<f64> = result.series.iter().map(|r| r.t).collect();
    if !ps.beta_is_three_alpha(&times) {
        return Err(Error::Hypothesis("these bounds need beta = 3 alpha".into()));
    }
    Ok(())
}

/// `x · e^{y}` with `0 · ∞ = 0`.
fn times_exp(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.exp()
    }
}

/// The `L²` and `L^∞` a priori bounds on `u` along a run of the `β = 3α` system.
pub fn lemma41_bounds(
    result: &SimResult,
    ps: &ParamSet,
    s: f64,
) -> Result<(BoundReport, BoundReport)> {
    require_beta_three_alpha(result, ps)?;
    let s0 = result.initial();
    let u0_l2 = s0.u.l2_norm();
    let u0_inf = s0.u.max_abs();
    let sig_hs = sobolev_norm(&s0.sigma, s - 1.0);
    let sig_l2 = s0.sigma.l2_norm();

    let mut times = Vec::with_capacity(result.series.len());
    let (mut b2, mut binf, mut o2, mut oinf) = (vec![], vec![], vec![], vec![]);
    for r in &result.series {
        let t = r.t;
        let c = ps.coefficients_at(t);
        let gamma_mass = ps.gamma.l1_mass(t)?;
        let i = r.int_inf_xi_ux;
        let sig4 = sig_hs.powi(4);
        let l2 = times_exp(2.0 * u0_l2, times_exp(2.0 * sig4 * gamma_mass, -3.0 * i));
        let j = times_exp(
            4.0 * u0_l2 * u0_l2 * c.alpha.abs(),
            times_exp(4.0 * sig4 * gamma_mass, -3.0 * i),
        ) + times_exp(sig_l2 * sig_l2 * c.gamma.abs(), -i);
        times.push(t);
        b2.push(l2);
        binf.push(u0_inf + if t == 0.0 { 0.0 } else { t * j });
        o2.push(r.l2_u);
        oinf.push(r.linf_u);
    }
    Ok((
        BoundReport::new("lemma41_l2", times.clone(), b2, o2),
        BoundReport::new("lemma41_linf", times, binf, oinf),
    ))
}

/// `𝓛(t)` for slope floor `M` (with `inf u_x >= -M` on the run).
pub fn l_of_t(result: &SimResult, ps: &ParamSet, s: f64, m: f64) -> Result<Vec<f64>> {
    require_beta_three_alpha(result, ps)?;
    if !(m >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "slope floor must be nonnegative, got {m}"
        )));
    }
    let s0 = result.initial();
    let consts = LConsts::new(s0, s);
    result
        .series
        .iter()
        .map(|r| consts.eval(ps, r.t, m))
        .collect()
}

/// `𝓛(t)` with the floor `M(t) = max(0, -min_{t' <= t} inf u_x)` of the run so far.
pub fn l_of_t_running(result: &SimResult, ps: &ParamSet, s: f64) -> Result<Vec<f64>> {
    require_beta_three_alpha(result, ps)?;
    let consts = LConsts::new(result.initial(), s);
    let mut floor: f64 = 0.0;
    result
        .series
        .iter()
        .map(|r| {
            floor = floor.max(-r.inf_ux);
            consts.eval(ps, r.t, floor)
        })
        .collect()
}

struct LConsts {
    u0_hs: f64,
    u0_l2: f64,
    sig_hs: f64,
}

impl LConsts {
    fn new(s0: &State, s: f64) -> Self {
        Self {
            u0_hs: sobolev_norm(&s0.u, s),
            u0_l2: s0.u.l2_norm(),
            sig_hs: sobolev_norm(&s0.sigma, s - 1.0),
        }
    }

    fn eval(&self, ps: &ParamSet, t: f64, m: f64) -> Result<f64> {
        let beta = ps.beta.l1_mass(t)?;
        let gamma = ps.gamma.l1_mass(t)?;
        let xi = ps.xi.l1_mass(t)?;
        let mx = m * xi;
        let squares = beta * beta + gamma * gamma;
        let sig2 = self.sig_hs * self.sig_hs;
        let inner = times_exp(4.0 * sig2 * sig2 * gamma, 3.0 * mx);
        Ok(1.5 * self.u0_hs * beta
            + times_exp(1.5 * sig2 * t * squares, mx)
            + times_exp(6.0 * self.u0_l2 * self.u0_l2 * t * squares, inner)
            + times_exp(0.5 * self.sig_hs * gamma, mx))
    }
}
