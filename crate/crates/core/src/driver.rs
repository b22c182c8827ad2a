//! The policy improvement loop.
//!
//! Each iteration evaluates the current policy, improves it, and records
//! the HJB residual, the value range, the largest policy change and whether
//! the payoff increased at every node compared with the previous iteration.

use crate::error::{Error, Result};
use crate::evaluation::evaluate_policy;
use crate::grid::{GridFunction, GridPolicy};
use crate::improvement::improve_policy;
use crate::problem::ControlProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiaConfig {
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Number of sampled actions for interval action spaces.
    pub n_actions: usize,
    /// Relative slack of the monotonicity check; the absolute slack is
    /// `monotonicity_slack · (1 + ‖V‖∞)`.
    pub monotonicity_slack: f64,
}

impl Default for PiaConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            max_iterations: 50,
            n_actions: 101,
            monotonicity_slack: 1e-8,
        }
    }
}

impl PiaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual_tol.is_finite() && self.residual_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.monotonicity_slack.is_finite() && self.monotonicity_slack >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "monotonicity_slack must be non-negative, got {}",
                self.monotonicity_slack
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub index: usize,
    pub max_residual: f64,
    pub value_min: f64,
    pub value_max: f64,
    /// Largest interior change between the evaluated and the improved policy.
    pub policy_change_sup: f64,
    /// Whether the payoff did not decrease (up to the slack) at any node
    /// compared with the previous iteration. Always true for the first.
    pub monotone: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ResidualTol,
    PolicyFixedPoint,
    MaxIterations,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ResidualTol => "ResidualTol",
            Termination::PolicyFixedPoint => "PolicyFixedPoint",
            Termination::MaxIterations => "MaxIterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiaReport {
    pub iterations: Vec<IterationRecord>,
    /// Payoff of `final_policy`.
    pub final_value: GridFunction,
    pub final_policy: GridPolicy,
    pub converged: bool,
    pub termination: Termination,
}

/// Alternates evaluation and improvement.
///
/// Stops when the improved policy equals the evaluated one at every
/// interior node (checked first for finite action sets), when the HJB
/// residual of the evaluated payoff drops to `residual_tol`, or after
/// `max_iterations` evaluations. The reported value and policy are always
/// the last evaluated pair, so `final_value` is the payoff of
/// `final_policy`.
pub fn run_pia(p: &ControlProblem, initial_policy: &GridPolicy, cfg: &PiaConfig) -> Result<PiaReport> {
    cfg.validate()?;
    initial_policy.check_against(p)?;

    let finite_actions = p.actions.is_finite_set();
    let mut policy = initial_policy.clone();
    let mut previous: Option<GridFunction> = None;
    let mut iterations = Vec::new();

    for index in 1..=cfg.max_iterations {
        let wrap = |e: Error| Error::AtIteration {
            iteration: index,
            source: Box::new(e),
        };
        let value = evaluate_policy(p, &policy).map_err(wrap)?;
        let improved = improve_policy(p, &value, cfg.n_actions).map_err(wrap)?;

        let monotone = match &previous {
            None => true,
            Some(prev) => {
                let slack = cfg.monotonicity_slack * (1.0 + value.sup_norm());
                value
                    .values()
                    .iter()
                    .zip(prev.values())
                    .all(|(new, old)| *new >= *old - slack)
            }
        };
        let policy_change_sup = improved.policy.interior_change_sup(&policy);
        iterations.push(IterationRecord {
            index,
            max_residual: improved.max_residual,
            value_min: value.min(),
            value_max: value.max(),
            policy_change_sup,
            monotone,
        });

        let fixed_point = policy_change_sup == 0.0;
        let small_residual = improved.max_residual <= cfg.residual_tol;
        let termination = if finite_actions && fixed_point {
            Some(Termination::PolicyFixedPoint)
        } else if small_residual {
            Some(Termination::ResidualTol)
        } else if fixed_point {
            // The sampled candidate set is finite too; another sweep would
            // reproduce the same policy.
            Some(Termination::PolicyFixedPoint)
        } else {
            None
        };
        if let Some(termination) = termination {
            return Ok(PiaReport {
                iterations,
                final_value: value,
                final_policy: policy,
                converged: true,
                termination,
            });
        }
        if index == cfg.max_iterations {
            return Ok(PiaReport {
                iterations,
                final_value: value,
                final_policy: policy,
                converged: false,
                termination: Termination::MaxIterations,
            });
        }
        previous = Some(value);
        policy = improved.policy;
    }
    unreachable!("max_iterations >= 1 guarantees a return inside the loop")
}

/// True iff every recorded iteration was monotone.
pub fn check_monotone_sequence(report: &PiaReport) -> bool {
    report.iterations.iter().all(|r| r.monotone)
}
