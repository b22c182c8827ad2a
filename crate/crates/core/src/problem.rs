//! Control problem description: the interval domain, the action space and
//! the coefficient functions of the killed diffusion
//!
//! ```text
//! dX = mu(X, a) dt + sigma(X, a) dW,   killed at rate alpha(X, a),
//! ```
//!
//! together with a running reward `f` and a boundary payoff `g`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Coefficient of the state and action.
pub type StateActionFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Function of the state only.
pub type StateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Open bounded interval `(left, right)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    left: f64,
    right: f64,
}

impl Domain {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(Error::InvalidDomain { left, right });
        }
        Ok(Self { left, right })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    /// True for points of the closed interval `[left, right]`.
    pub fn contains_closed(&self, x: f64) -> bool {
        x >= self.left && x <= self.right
    }
}

/// Compact action set: a closed interval or a finite, strictly increasing list.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionSpace {
    Interval { min: f64, max: f64 },
    Finite(Vec<f64>),
}

impl ActionSpace {
    pub fn interval(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::InvalidActionSpace(format!(
                "interval [{min}, {max}] must be finite with min <= max"
            )));
        }
        Ok(ActionSpace::Interval { min, max })
    }

    pub fn finite(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidActionSpace(
                "finite action list is empty".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidActionSpace(
                "finite action list contains a non-finite value".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidActionSpace(
                "finite action list must be strictly increasing".into(),
            ));
        }
        Ok(ActionSpace::Finite(values))
    }

    pub fn contains(&self, a: f64) -> bool {
        match self {
            ActionSpace::Interval { min, max } => a >= *min && a <= *max,
            ActionSpace::Finite(values) => values.contains(&a),
        }
    }

    pub fn is_finite_set(&self) -> bool {
        matches!(self, ActionSpace::Finite(_))
    }

    pub fn min(&self) -> f64 {
        match self {
            ActionSpace::Interval { min, .. } => *min,
            ActionSpace::Finite(values) => values[0],
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            ActionSpace::Interval { max, .. } => *max,
            ActionSpace::Finite(values) => values[values.len() - 1],
        }
    }

    /// Candidate actions used by the pointwise maximisation.
    ///
    /// A finite set is returned as-is. An interval is sampled at `n_actions`
    /// equally spaced points with both endpoints included exactly; a
    /// degenerate interval yields its single point.
    pub fn candidates(&self, n_actions: usize) -> Vec<f64> {
        match self {
            ActionSpace::Finite(values) => values.clone(),
            ActionSpace::Interval { min, max } => {
                if min == max || n_actions < 2 {
                    return vec![*min];
                }
                let last = n_actions - 1;
                (0..n_actions)
                    .map(|k| match k {
                        0 => *min,
                        k if k == last => *max,
                        k => min + (max - min) * (k as f64 / last as f64),
                    })
                    .collect()
            }
        }
    }
}

/// The coefficient functions of the controlled killed diffusion.
///
/// Functions must be re-entrant; the solver may call them from several
/// threads at once.
#[derive(Clone)]
pub struct CoefficientField {
    pub sigma: StateActionFn,
    pub mu: StateActionFn,
    pub alpha: StateActionFn,
    pub running_reward: StateActionFn,
    pub boundary_payoff: StateFn,
}

impl CoefficientField {
    pub fn new(
        sigma: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        mu: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        alpha: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        running_reward: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        boundary_payoff: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            sigma: Arc::new(sigma),
            mu: Arc::new(mu),
            alpha: Arc::new(alpha),
            running_reward: Arc::new(running_reward),
            boundary_payoff: Arc::new(boundary_payoff),
        }
    }
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CoefficientField { .. }")
    }
}

/// Coefficients evaluated at one state/action pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalCoefficients {
    pub sigma: f64,
    pub mu: f64,
    pub alpha: f64,
    pub running_reward: f64,
}

fn finite(name: &'static str, x: f64, a: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteCoefficient { name, x, a, value })
    }
}

/// A complete problem instance.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    pub domain: Domain,
    pub actions: ActionSpace,
    pub coeffs: CoefficientField,
    /// Declared ellipticity floor for `sigma`.
    pub sigma_min: f64,
    /// Declared floor for the killing rate.
    pub alpha_min: f64,
}

impl ControlProblem {
    pub fn new(
        domain: Domain,
        actions: ActionSpace,
        coeffs: CoefficientField,
        sigma_min: f64,
        alpha_min: f64,
    ) -> Result<Self> {
        if !(sigma_min.is_finite() && sigma_min > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma_min must be positive, got {sigma_min}"
            )));
        }
        if !(alpha_min.is_finite() && alpha_min >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha_min must be non-negative, got {alpha_min}"
            )));
        }
        Ok(Self {
            domain,
            actions,
            coeffs,
            sigma_min,
            alpha_min,
        })
    }

    /// `(sigma, mu, alpha)` at `(x, a)`, each checked for finiteness.
    pub fn generator_coefficients(&self, x: f64, a: f64) -> Result<(f64, f64, f64)> {
        let c = &self.coeffs;
        Ok((
            finite("sigma", x, a, (c.sigma)(x, a))?,
            finite("mu", x, a, (c.mu)(x, a))?,
            finite("alpha", x, a, (c.alpha)(x, a))?,
        ))
    }

    /// All state/action coefficients at `(x, a)`, each checked for finiteness.
    pub fn local(&self, x: f64, a: f64) -> Result<LocalCoefficients> {
        let (sigma, mu, alpha) = self.generator_coefficients(x, a)?;
        let running_reward = finite("f", x, a, (self.coeffs.running_reward)(x, a))?;
        Ok(LocalCoefficients {
            sigma,
            mu,
            alpha,
            running_reward,
        })
    }

    pub fn boundary_payoff(&self, x: f64) -> Result<f64> {
        finite("g", x, f64::NAN, (self.coeffs.boundary_payoff)(x))
    }
}

/// One failed sample of [`validate_problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: String,
    pub x: f64,
    /// `NaN` for checks that do not involve an action (the boundary payoff).
    pub a: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

/// Samples the coefficients on an `n_x` by `n_a` tensor grid and records
/// every floor or finiteness violation.
///
/// Interval action spaces are sampled at `n_a` equally spaced points with
/// both endpoints; finite action spaces are sampled in full. The Lipschitz
/// conditions on the coefficients cannot be checked from black-box
/// functions and are not attempted.
pub fn validate_problem(p: &ControlProblem, n_x: usize, n_a: usize) -> ValidationReport {
    let n_x = n_x.max(2);
    let n_a = n_a.max(1);
    let (l, r) = (p.domain.left, p.domain.right);
    let xs: Vec<f64> = (0..n_x)
        .map(|i| match i {
            0 => l,
            i if i == n_x - 1 => r,
            i => l + (r - l) * (i as f64 / (n_x - 1) as f64),
        })
        .collect();
    let actions = p.actions.candidates(n_a);

    let mut violations = Vec::new();
    let mut push = |check: &str, x: f64, a: f64, observed: f64| {
        violations.push(Violation {
            check: check.to_string(),
            x,
            a,
            observed,
        })
    };

    for &x in &xs {
        for &a in &actions {
            let c = &p.coeffs;
            let sigma = (c.sigma)(x, a);
            let mu = (c.mu)(x, a);
            let alpha = (c.alpha)(x, a);
            let f = (c.running_reward)(x, a);
            for (name, v) in [("sigma", sigma), ("mu", mu), ("alpha", alpha), ("f", f)] {
                if !v.is_finite() {
                    push(&format!("finite_{name}"), x, a, v);
                }
            }
            if sigma < p.sigma_min {
                push("sigma_floor", x, a, sigma);
            }
            if alpha < p.alpha_min {
                push("alpha_floor", x, a, alpha);
            }
        }
    }
    for x in [l, r] {
        let g = (p.coeffs.boundary_payoff)(x);
        if !g.is_finite() {
            push("finite_g", x, f64::NAN, g);
        }
    }

    ValidationReport {
        passed: violations.is_empty(),
        violations,
    }
}

/// The generator of the killed diffusion under a frozen action applied to
/// local derivative data: `½σ²·v'' + μ·v' − α·v`.
pub fn apply_generator(p: &ControlProblem, x: f64, a: f64, v: f64, dv: f64, d2v: f64) -> Result<f64> {
    let (sigma, mu, alpha) = p.generator_coefficients(x, a)?;
    Ok(0.5 * sigma * sigma * d2v + mu * dv - alpha * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn constant_problem(sigma: f64, mu: f64, alpha: f64) -> ControlProblem {
        ControlProblem::new(
            Domain::new(-1.0, 1.0).unwrap(),
            ActionSpace::finite(vec![0.0]).unwrap(),
            CoefficientField::new(
                move |_, _| sigma,
                move |_, _| mu,
                move |_, _| alpha,
                |_, _| 0.0,
                |_| 0.0,
            ),
            0.5,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn domain_rejects_bad_endpoints() {
        assert!(Domain::new(1.0, 1.0).is_err());
        assert!(Domain::new(2.0, 1.0).is_err());
        assert!(Domain::new(f64::NEG_INFINITY, 1.0).is_err());
        assert!(Domain::new(-1.0, 1.0).is_ok());
    }

    #[test]
    fn action_space_invariants() {
        assert!(ActionSpace::finite(vec![]).is_err());
        assert!(ActionSpace::finite(vec![1.0, 1.0]).is_err());
        assert!(ActionSpace::finite(vec![1.0, -1.0]).is_err());
        assert!(ActionSpace::interval(1.0, -1.0).is_err());
        assert!(ActionSpace::interval(0.0, 0.0).is_ok());
    }

    #[test]
    fn interval_candidates_include_endpoints() {
        let a = ActionSpace::interval(-1.0, 1.0).unwrap();
        let c = a.candidates(201);
        assert_eq!(c.len(), 201);
        assert_eq!(c[0], -1.0);
        assert_eq!(c[200], 1.0);
        assert!((c[100]).abs() < 1e-15);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ActionSpace::interval(0.3, 0.3).unwrap().candidates(5), vec![0.3]);
    }

    #[test]
    fn sigma_min_must_be_positive() {
        let c = CoefficientField::new(|_, _| 1.0, |_, _| 0.0, |_, _| 1.0, |_, _| 0.0, |_| 0.0);
        let d = Domain::new(0.0, 1.0).unwrap();
        let a = ActionSpace::finite(vec![0.0]).unwrap();
        assert!(ControlProblem::new(d, a.clone(), c.clone(), 0.0, 0.0).is_err());
        assert!(ControlProblem::new(d, a, c, 1.0, -0.1).is_err());
    }

    #[test]
    fn validate_constant_problem_passes() {
        let mut p = constant_problem(1.0, 0.0, 1.0);
        p.alpha_min = 1.0;
        let report = validate_problem(&p, 11, 3);
        assert!(report.passed);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn validate_flags_sigma_below_floor_near_zero() {
        let p = ControlProblem::new(
            Domain::new(0.0, 1.0).unwrap(),
            ActionSpace::finite(vec![0.0]).unwrap(),
            CoefficientField::new(|x, _| x, |_, _| 0.0, |_, _| 1.0, |_, _| 0.0, |_| 0.0),
            0.1,
            0.0,
        )
        .unwrap();
        let report = validate_problem(&p, 11, 1);
        assert!(!report.passed);
        assert!(report
            .violations
            .iter()
            .any(|v| v.check == "sigma_floor" && v.x == 0.0));
        assert!(report.violations.iter().all(|v| v.x < 0.1));
    }

    #[test]
    fn validate_flags_non_finite() {
        let p = ControlProblem::new(
            Domain::new(0.0, 1.0).unwrap(),
            ActionSpace::finite(vec![0.0]).unwrap(),
            CoefficientField::new(|_, _| 1.0, |x, _| 1.0 / x, |_, _| 1.0, |_, _| 0.0, |_| f64::NAN),
            0.1,
            0.0,
        )
        .unwrap();
        let report = validate_problem(&p, 5, 1);
        let checks: Vec<&str> = report.violations.iter().map(|v| v.check.as_str()).collect();
        assert!(checks.contains(&"finite_mu"));
        assert!(checks.contains(&"finite_g"));
    }

    #[test]
    fn generator_direct_arithmetic() {
        let p = constant_problem(2f64.sqrt(), 0.0, 1.0);
        let out = apply_generator(&p, 0.0, 0.0, 2.0, 5.0, 3.0).unwrap();
        assert!((out - 1.0).abs() < 1e-14);
        assert_eq!(apply_generator(&p, 0.3, 0.0, 0.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn generator_names_non_finite_coefficient() {
        let p = constant_problem(1.0, f64::INFINITY, 1.0);
        match apply_generator(&p, 0.0, 0.0, 1.0, 1.0, 1.0) {
            Err(Error::NonFiniteCoefficient { name, .. }) => assert_eq!(name, "mu"),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn generator_is_linear(
            x in -1.0f64..1.0, c in -10.0f64..10.0,
            v in -5.0f64..5.0, dv in -5.0f64..5.0, d2v in -5.0f64..5.0,
        ) {
            let p = ControlProblem::new(
                Domain::new(-1.0, 1.0).unwrap(),
                ActionSpace::interval(-1.0, 1.0).unwrap(),
                CoefficientField::new(
                    |x, a| 1.0 + x * x + a * a,
                    |x, a| x - a,
                    |x, a| 0.5 + (x * a).abs(),
                    |_, _| 0.0,
                    |_| 0.0,
                ),
                0.5,
                0.0,
            ).unwrap();
            let lhs = apply_generator(&p, x, 0.3, c * v, c * dv, c * d2v).unwrap();
            let rhs = c * apply_generator(&p, x, 0.3, v, dv, d2v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn validation_is_idempotent(n_x in 2usize..30, n_a in 1usize..6) {
            let p = ControlProblem::new(
                Domain::new(0.0, 1.0).unwrap(),
                ActionSpace::interval(-1.0, 1.0).unwrap(),
                CoefficientField::new(|x, a| x + a, |_, _| 0.0, |_, a| a, |_, _| 0.0, |_| 0.0),
                0.2,
                0.1,
            ).unwrap();
            prop_assert_eq!(validate_problem(&p, n_x, n_a), validate_problem(&p, n_x, n_a));
        }
    }
}
