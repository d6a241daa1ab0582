//! Time-dependent coefficients `α, β, γ, ξ` and their `L¹` masses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ParamKind {
    Constant {
        value: f64,
    },
    /// `scale * exp(-2 λ t)`
    DampedExp {
        scale: f64,
        lambda: f64,
    },
    /// Piecewise-linear table, zero beyond the last node.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamFn {
    pub kind: ParamKind,
    #[serde(default)]
    pub certified_nonnegative: bool,
}

impl ParamFn {
    pub fn constant(value: f64) -> Self {
        Self {
            kind: ParamKind::Constant { value },
            certified_nonnegative: value >= 0.0,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn damped_exp(scale: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "damped_exp requires lambda > 0, got {lambda}"
            )));
        }
        if !scale.is_finite() {
            return Err(Error::InvalidParam(
                "damped_exp scale must be finite".into(),
            ));
        }
        Ok(Self {
            kind: ParamKind::DampedExp { scale, lambda },
            certified_nonnegative: scale >= 0.0,
        })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidParam(
                "tabulated needs matching times/values with at least two nodes".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidParam(
                "tabulated time grid must start at 0".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParam(
                "tabulated time grid must be strictly increasing".into(),
            ));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam(
                "tabulated entries must be finite".into(),
            ));
        }
        let nonneg = values.iter().all(|&v| v >= 0.0);
        Ok(Self {
            kind: ParamKind::Tabulated { times, values },
            certified_nonnegative: nonneg,
        })
    }

    /// `θ · p`, used to probe monotonicity of the theorem conditions.
    pub fn scaled(&self, theta: f64) -> Self {
        let kind = match &self.kind {
            ParamKind::Constant { value } => ParamKind::Constant {
                value: value * theta,
            },
            ParamKind::DampedExp { scale, lambda } => ParamKind::DampedExp {
                scale: scale * theta,
                lambda: *lambda,
            },
            ParamKind::Tabulated { times, values } => ParamKind::Tabulated {
                times: times.clone(),
                values: values.iter().map(|v| v * theta).collect(),
            },
        };
        Self {
            kind,
            certified_nonnegative: self.certified_nonnegative && theta >= 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.value_at(t))
    }

    /// Evaluation without the sign check on `t`; RK stages of a reversed
    /// step may probe slightly negative times.
    pub(crate) fn value_at(&self, t: f64) -> f64 {
        match &self.kind {
            ParamKind::Constant { value } => *value,
            ParamKind::DampedExp { scale, lambda } => scale * (-2.0 * lambda * t).exp(),
            ParamKind::Tabulated { times, values } => interpolate(times, values, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            ParamKind::Constant { value } => *value == 0.0,
            ParamKind::DampedExp { scale, .. } => *scale == 0.0,
            ParamKind::Tabulated { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// `∫₀^{t_end} |p(t')| dt'`; pass `f64::INFINITY` for the full half-line.
    pub fn l1_mass(&self, t_end: f64) -> Result<f64> {
        if t_end < 0.0 || t_end.is_nan() {
            return Err(Error::NegativeTime(t_end));
        }
        match &self.kind {
            ParamKind::Constant { value } => {
                if t_end.is_infinite() {
                    if *value == 0.0 {
                        Ok(0.0)
                    } else {
                        Err(Error::DivergentMass(format!(
                            "constant coefficient {value} over [0, ∞)"
                        )))
                    }
                } else {
                    Ok(value.abs() * t_end)
                }
            }
            ParamKind::DampedExp { scale, lambda } => {
                let tail = if t_end.is_infinite() {
                    0.0
                } else {
                    (-2.0 * lambda * t_end).exp()
                };
                Ok(scale.abs() * (1.0 - tail) / (2.0 * lambda))
            }
            ParamKind::Tabulated { times, values } => {
                let end = t_end.min(*times.last().expect("validated non-empty"));
                let mut total = 0.0;
                for w in 0..times.len() - 1 {
                    let (a, b) = (times[w], times[w + 1].min(end));
                    if b <= a {
                        break;
                    }
                    let f = |t: f64| interpolate(times, values, t).abs();
                    total += adaptive_simpson(&f, a, b, 1e-10 / times.len() as f64);
                }
                Ok(total)
            }
        }
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let last = times.len() - 1;
    if t > times[last] {
        return 0.0;
    }
    if t <= times[0] {
        return values[0];
    }
    let i = match times.binary_search_by(|probe| probe.total_cmp(&t)) {
        Ok(i) => return values[i],
        Err(i) => i - 1,
    };
    let w = (t - times[i]) / (times[i + 1] - times[i]);
    values[i] * (1.0 - w) + values[i + 1] * w
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Constants of the damped preset, kept for the damped-system existence checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampedConstants {
    pub b: f64,
    pub kappa: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub xi: f64,
    pub damping: f64,
}

impl Coefficients {
    pub fn negated(self) -> Self {
        Self {
            alpha: -self.alpha,
            beta: -self.beta,
            gamma: -self.gamma,
            xi: -self.xi,
            damping: -self.damping,
        }
    }
}

/// The four coefficient functions plus an optional linear damping rate.
///
/// `damping` adds `-λ u`, `-λ σ` to the evolution, which is the weakly
/// dissipative system before any change of variables; it is zero for the
/// reformulated presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub alpha: ParamFn,
    pub beta: ParamFn,
    pub gamma: ParamFn,
    pub xi: ParamFn,
    #[serde(default)]
    pub damping: f64,
    #[serde(default)]
    pub damped: Option<DampedConstants>,
}

impl ParamSet {
    pub fn new(alpha: ParamFn, beta: ParamFn, gamma: ParamFn, xi: ParamFn) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            xi,
            damping: 0.0,
            damped: None,
        }
    }

    pub fn constant(alpha: f64, beta: f64, gamma: f64, xi: f64) -> Self {
        Self::new(
            ParamFn::constant(alpha),
            ParamFn::constant(beta),
            ParamFn::constant(gamma),
            ParamFn::constant(xi),
        )
    }

    /// `α = e^{-2λt}, β = b e^{-2λt}, γ = κ e^{-2λt}, ξ = e^{-2λt}`.
    pub fn damped_preset(b: f64, kappa: f64, lambda: f64) -> Result<Self> {
        let mut ps = Self::new(
            ParamFn::damped_exp(1.0, lambda)?,
            ParamFn::damped_exp(b, lambda)?,
            ParamFn::damped_exp(kappa, lambda)?,
            ParamFn::damped_exp(1.0, lambda)?,
        );
        ps.damped = Some(DampedConstants { b, kappa, lambda });
        Ok(ps)
    }

    /// Undamped two-component b-family: `α = ξ = 1, β = b, γ = κ`.
    pub fn b_family(b: f64, kappa: f64) -> Self {
        Self::constant(1.0, b, kappa, 1.0)
    }

    /// The b-family with explicit linear damping `λ m`, `λ σ`.
    pub fn weakly_dissipative(b: f64, kappa: f64, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "damping rate must be nonnegative, got {lambda}"
            )));
        }
        let mut ps = Self::b_family(b, kappa);
        ps.damping = lambda;
        Ok(ps)
    }

    pub fn scaled(&self, theta: f64) -> Self {
        Self {
            alpha: self.alpha.scaled(theta),
            beta: self.beta.scaled(theta),
            gamma: self.gamma.scaled(theta),
            xi: self.xi.scaled(theta),
            damping: self.damping,
            damped: None,
        }
    }

    pub fn eval(&self, t: f64) -> Result<Coefficients> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.coefficients_at(t))
    }

    pub(crate) fn coefficients_at(&self, t: f64) -> Coefficients {
        Coefficients {
            alpha: self.alpha.value_at(t),
            beta: self.beta.value_at(t),
            gamma: self.gamma.value_at(t),
            xi: self.xi.value_at(t),
            damping: self.damping,
        }
    }

    /// `∫₀^t (|α| + |β| + |γ| + |ξ|)`.
    pub fn total_mass(&self, t_end: f64) -> Result<f64> {
        Ok(self.alpha.l1_mass(t_end)?
            + self.beta.l1_mass(t_end)?
            + self.gamma.l1_mass(t_end)?
            + self.xi.l1_mass(t_end)?)
    }

    /// `∫₀^t (|α| + |γ| + |ξ|)`, the mass governing the blow-up lower bound.
    pub fn blowup_mass(&self, t_end: f64) -> Result<f64> {
        Ok(self.alpha.l1_mass(t_end)? + self.gamma.l1_mass(t_end)? + self.xi.l1_mass(t_end)?)
    }

    /// Whether `β ≡ 3α` holds at the given sample times.
    pub fn beta_is_three_alpha(&self, times: &[f64]) -> bool {
        if let (ParamKind::Constant { value: a }, ParamKind::Constant { value: b }) =
            (&self.alpha.kind, &self.beta.kind)
        {
            return (b - 3.0 * a).abs() <= 1e-12 * a.abs().max(1.0);
        }
        times.iter().all(|&t| {
            let c = self.coefficients_at(t);
            (c.beta - 3.0 * c.alpha).abs() <= 1e-12 * c.alpha.abs().max(1.0)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignVerdict {
    pub satisfied: bool,
    pub first_violation: Option<f64>,
}

/// Samples `ξ ≥ 0` and `α + γ + ξ ≥ 0` on `[0, horizon]`.
pub fn sign_check(ps: &ParamSet, horizon: f64, samples: usize) -> Result<SignVerdict> {
    if samples < 2 {
        return Err(Error::Precondition(
            "sign_check needs at least two samples".into(),
        ));
    }
    if horizon < 0.0 {
        return Err(Error::NegativeTime(horizon));
    }
    const TOL: f64 = -1e-14;
    for i in 0..samples {
        let t = horizon * i as f64 / (samples - 1) as f64;
        let c = ps.coefficients_at(t);
        if c.xi < TOL || c.alpha + c.gamma + c.xi < TOL {
            return Ok(SignVerdict {
                satisfied: false,
                first_violation: Some(t),
            });
        }
    }
    Ok(SignVerdict {
        satisfied: true,
        first_violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(ParamFn::constant(3.0).eval(7.0).unwrap(), 3.0);
        assert_eq!(
            ParamFn::damped_exp(1.0, 0.5).unwrap().eval(0.0).unwrap(),
            1.0
        );
        let v = ParamFn::damped_exp(2.0, 1.0)
            .unwrap()
            .eval(2f64.ln())
            .unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(
            ParamFn::constant(1.0).eval(-1.0),
            Err(Error::NegativeTime(-1.0))
        );
    }

    #[test]
    fn constructor_validation() {
        assert!(ParamFn::damped_exp(1.0, 0.0).is_err());
        assert!(ParamFn::tabulated(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(ParamFn::tabulated(vec![0.5, 1.0], vec![0.0; 2]).is_err());
        assert!(ParamFn::tabulated(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_vanishes_past_table() {
        let p = ParamFn::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!((p.eval(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((p.eval(1.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.eval(1.0).unwrap(), 1.0);
        assert_eq!(p.eval(3.0).unwrap(), 0.0);
    }

    #[test]
    fn l1_mass_examples() {
        let lam = 0.7;
        let d = ParamFn::damped_exp(1.0, lam).unwrap();
        assert!((d.l1_mass(f64::INFINITY).unwrap() - 1.0 / (2.0 * lam)).abs() < 1e-15);
        assert!((ParamFn::constant(-2.0).l1_mass(3.0).unwrap() - 6.0).abs() < 1e-15);
        assert!(matches!(
            ParamFn::constant(1.0).l1_mass(f64::INFINITY),
            Err(Error::DivergentMass(_))
        ));
        assert_eq!(ParamFn::zero().l1_mass(f64::INFINITY).unwrap(), 0.0);
        let tri = ParamFn::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!((tri.l1_mass(f64::INFINITY).unwrap() - 1.0).abs() < 1e-10);
        // Sign change inside a segment: |p| has a kink at t = 0.5.
        let sc = ParamFn::tabulated(vec![0.0, 1.0], vec![-1.0, 1.0]).unwrap();
        assert!((sc.l1_mass(1.0).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn damped_mass_closed_form_and_monotone() {
        let d = ParamFn::damped_exp(-1.5, 0.3).unwrap();
        let mut prev = 0.0;
        for i in 0..50 {
            let t = 0.2 * i as f64;
            let m = d.l1_mass(t).unwrap();
            let exact = 1.5 * (1.0 - (-0.6 * t).exp()) / 0.6;
            assert!((m - exact).abs() < 1e-12);
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn damped_preset_invariant() {
        let ps = ParamSet::damped_preset(2.0, -1.0, 0.4).unwrap();
        for i in 0..20 {
            let t = 0.37 * i as f64;
            let c = ps.eval(t).unwrap();
            assert!((c.beta - 2.0 * c.alpha).abs() <= 1e-14);
            assert!((c.gamma + c.alpha).abs() <= 1e-14);
            assert!((c.xi - c.alpha).abs() <= 1e-14);
        }
    }

    #[test]
    fn sign_check_examples() {
        let ps = ParamSet::damped_preset(2.0, 1.0, 0.5).unwrap();
        assert!(sign_check(&ps, 5.0, 11).unwrap().satisfied);
        let bad = ParamSet::constant(-1.0, 0.0, 0.0, 0.0);
        let v = sign_check(&bad, 1.0, 5).unwrap();
        assert_eq!(v.first_violation, Some(0.0));
        let ok = ParamSet::constant(-1.0, 0.0, 0.5, 0.6);
        assert!(sign_check(&ok, 1.0, 5).unwrap().satisfied);
        assert!(sign_check(&ok, 1.0, 1).is_err());
    }
}
