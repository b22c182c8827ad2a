//! Problem files: a TOML document describing a control problem with
//! coefficients written in the [`expr`](crate::expr) language, plus grid,
//! solver and simulation settings.
//!
//! ```toml
//! [domain]
//! left = -1.0
//! right = 1.0
//!
//! [actions]
//! kind = "interval"        # or "finite"
//! values = [-1.0, 1.0]     # [min, max] for an interval
//!
//! [coefficients]
//! sigma = "1"
//! mu = "0"
//! alpha = "4*a + 4.5"
//! f = "-6.5*sinh(2*max(x, 0))"
//! g = "-sinh(2*max(x, 0)) - 2*sinh(min(x, 0))"
//!
//! [floors]
//! sigma_min = 1.0
//! alpha_min = 0.5
//!
//! [grid]
//! n_cells = 2000
//!
//! [pia]
//! residual_tol = 0.0236
//! max_iterations = 50
//! n_actions = 201
//! initial_policy = "0"     # optional, an expression in x
//!
//! [sim]
//! step = 1e-3
//! n_paths = 100000
//! seed = 1
//! t_max = 50.0
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::driver::PiaConfig;
use crate::expr::{Expression, ParseError};
use crate::grid::{Grid, GridPolicy};
use crate::monte_carlo::SimConfig;
use crate::problem::{ActionSpace, CoefficientField, ControlProblem, Domain};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed problem file: {0}")]
    Syntax(String),
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("field `{field}`: expression error {source}")]
    Expression {
        field: &'static str,
        #[source]
        source: ParseError,
    },
}

fn field_err(field: &'static str, message: impl Into<String>) -> SpecError {
    SpecError::Field {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Interval,
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionsSection {
    pub kind: ActionKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSection {
    pub sigma: String,
    pub mu: String,
    pub alpha: String,
    pub f: String,
    pub g: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorsSection {
    pub sigma_min: f64,
    pub alpha_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiaSection {
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub n_actions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotonicity_slack: Option<f64>,
    /// Expression in `x` for the starting policy; defaults to the smallest
    /// action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_policy: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub step: f64,
    pub n_paths: usize,
    /// At most `i64::MAX`, the largest integer a problem file can hold.
    pub seed: u64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpecFile {
    pub domain: DomainSection,
    pub actions: ActionsSection,
    pub coefficients: CoefficientsSection,
    pub floors: FloorsSection,
    pub grid: GridSection,
    pub pia: PiaSection,
    pub sim: SimSection,
}

/// Everything needed to run the solver and the simulator.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: ControlProblem,
    pub grid: Grid,
    pub pia: PiaConfig,
    pub sim: SimConfig,
    pub initial_policy: GridPolicy,
}

impl ProblemSpecFile {
    /// Parses and checks the document; expressions and numeric invariants
    /// are validated here so that errors name the offending field.
    pub fn from_toml_str(text: &str) -> Result<Self, SpecError> {
        let spec: Self = toml::from_str(text).map_err(|e| SpecError::Syntax(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|e| SpecError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("problem files always serialise")
    }

    fn check(&self) -> Result<(), SpecError> {
        self.build().map(|_| ())
    }

    fn action_space(&self) -> Result<ActionSpace, SpecError> {
        let values = &self.actions.values;
        match self.actions.kind {
            ActionKind::Interval => {
                if values.len() != 2 {
                    return Err(field_err(
                        "actions.values",
                        format!("an interval needs exactly [min, max], got {} values", values.len()),
                    ));
                }
                ActionSpace::interval(values[0], values[1])
            }
            ActionKind::Finite => ActionSpace::finite(values.clone()),
        }
        .map_err(|e| field_err("actions.values", e.to_string()))
    }

    /// Builds the problem, grid, solver and simulation settings.
    pub fn build(&self) -> Result<LoadedProblem, SpecError> {
        let domain = Domain::new(self.domain.left, self.domain.right)
            .map_err(|e| field_err("domain", e.to_string()))?;
        let actions = self.action_space()?;

        let parse = |field: &'static str, src: &str| {
            Expression::parse(src).map_err(|source| SpecError::Expression { field, source })
        };
        let c = &self.coefficients;
        let sigma = parse("coefficients.sigma", &c.sigma)?;
        let mu = parse("coefficients.mu", &c.mu)?;
        let alpha = parse("coefficients.alpha", &c.alpha)?;
        let f = parse("coefficients.f", &c.f)?;
        let g = Expression::parse_state_only(&c.g)
            .map_err(|source| SpecError::Expression {
                field: "coefficients.g",
                source,
            })?;
        let coeffs = CoefficientField {
            sigma: state_action(sigma),
            mu: state_action(mu),
            alpha: state_action(alpha),
            running_reward: state_action(f),
            boundary_payoff: Arc::new(move |x| g.eval(x, f64::NAN)),
        };

        if !(self.floors.sigma_min.is_finite() && self.floors.sigma_min > 0.0) {
            return Err(field_err("floors.sigma_min", "must be positive"));
        }
        if !(self.floors.alpha_min.is_finite() && self.floors.alpha_min >= 0.0) {
            return Err(field_err("floors.alpha_min", "must be non-negative"));
        }
        let problem = ControlProblem::new(domain, actions, coeffs, self.floors.sigma_min, self.floors.alpha_min)
            .map_err(|e| field_err("floors", e.to_string()))?;

        let grid = Grid::new(domain, self.grid.n_cells).map_err(|e| field_err("grid.n_cells", e.to_string()))?;

        let pia = PiaConfig {
            residual_tol: self.pia.residual_tol,
            max_iterations: self.pia.max_iterations,
            n_actions: self.pia.n_actions,
            monotonicity_slack: self.pia.monotonicity_slack.unwrap_or(PiaConfig::default().monotonicity_slack),
        };
        if !(pia.residual_tol.is_finite() && pia.residual_tol > 0.0) {
            return Err(field_err("pia.residual_tol", "must be positive"));
        }
        if pia.max_iterations < 1 {
            return Err(field_err("pia.max_iterations", "must be at least 1"));
        }
        if !problem.actions.is_finite_set() && pia.n_actions < 2 {
            return Err(field_err("pia.n_actions", "interval action spaces need at least 2 samples"));
        }
        pia.validate().map_err(|e| field_err("pia.monotonicity_slack", e.to_string()))?;

        let sim = SimConfig {
            step: self.sim.step,
            n_paths: self.sim.n_paths,
            seed: self.sim.seed,
            t_max: self.sim.t_max,
        };
        sim.validate().map_err(|e| field_err("sim", e.to_string()))?;

        let initial_policy = match &self.pia.initial_policy {
            None => GridPolicy::constant(grid, problem.actions.min()),
            Some(src) => {
                let e = Expression::parse_state_only(src).map_err(|source| SpecError::Expression {
                    field: "pia.initial_policy",
                    source,
                })?;
                GridPolicy::from_fn(grid, |x| e.eval(x, f64::NAN))
            }
        };
        initial_policy
            .check_against(&problem)
            .map_err(|e| field_err("pia.initial_policy", e.to_string()))?;

        Ok(LoadedProblem {
            problem,
            grid,
            pia,
            sim,
            initial_policy,
        })
    }
}

fn state_action(e: Expression) -> crate::problem::StateActionFn {
    Arc::new(move |x, a| e.eval(x, a))
}

/// The built-in oracle problems as problem files.
pub fn oracle_spec(name: &str) -> Option<ProblemSpecFile> {
    let domain = DomainSection {
        left: -1.0,
        right: 1.0,
    };
    let sim = SimSection {
        step: 1e-3,
        n_paths: 20_000,
        seed: 20_240_601,
        t_max: 50.0,
    };
    let spec = match name {
        "example1" => ProblemSpecFile {
            domain,
            actions: ActionsSection {
                kind: ActionKind::Finite,
                values: vec![-1.0, 1.0],
            },
            coefficients: CoefficientsSection {
                sigma: "1".into(),
                mu: "0".into(),
                alpha: "2 + a".into(),
                f: "0".into(),
                g: "-sinh(sqrt(6)*max(x, 0)) - sqrt(3)*sinh(sqrt(2)*min(x, 0))".into(),
            },
            floors: FloorsSection {
                sigma_min: 1.0,
                alpha_min: 1.0,
            },
            grid: GridSection { n_cells: 2000 },
            pia: PiaSection {
                residual_tol: 1e-8,
                max_iterations: 20,
                n_actions: 2,
                monotonicity_slack: None,
                initial_policy: Some("-1".into()),
            },
            sim,
        },
        "example2" => ProblemSpecFile {
            domain,
            actions: ActionsSection {
                kind: ActionKind::Interval,
                values: vec![-1.0, 1.0],
            },
            coefficients: CoefficientsSection {
                sigma: "1".into(),
                mu: "0".into(),
                alpha: "4*a + 4.5".into(),
                f: "-6.5*sinh(2*max(x, 0))".into(),
                g: "-sinh(2*max(x, 0)) - 2*sinh(min(x, 0))".into(),
            },
            floors: FloorsSection {
                sigma_min: 1.0,
                alpha_min: 0.5,
            },
            grid: GridSection { n_cells: 2000 },
            pia: PiaSection {
                // 10⁻³ · sup|f| = 10⁻³ · 6.5 · sinh(2)
                residual_tol: 1e-3 * 6.5 * 2f64.sinh(),
                max_iterations: 50,
                n_actions: 201,
                monotonicity_slack: None,
                initial_policy: Some("0".into()),
            },
            sim,
        },
        "manufactured" => ProblemSpecFile {
            domain,
            actions: ActionsSection {
                kind: ActionKind::Finite,
                values: vec![0.0],
            },
            coefficients: CoefficientsSection {
                sigma: "sqrt(2)".into(),
                mu: "0".into(),
                alpha: "1".into(),
                f: "1".into(),
                g: "0".into(),
            },
            floors: FloorsSection {
                sigma_min: 1.0,
                alpha_min: 1.0,
            },
            grid: GridSection { n_cells: 1000 },
            pia: PiaSection {
                residual_tol: 1e-8,
                max_iterations: 5,
                n_actions: 2,
                monotonicity_slack: None,
                initial_policy: None,
            },
            sim,
        },
        _ => return None,
    };
    Some(spec)
}
