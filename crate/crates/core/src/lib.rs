//! Policy improvement for controlled one-dimensional killed diffusions on
//! a bounded interval.
//!
//! A [`ControlProblem`] describes the diffusion `dX = μ(X,a)dt + σ(X,a)dW`,
//! killed at rate `α(X,a)`, with running reward `f` and boundary payoff
//! `g`. The solver discretises it with a monotone upwind scheme and runs
//! the policy improvement loop ([`run_pia`]): evaluate the current Markov
//! policy by solving a tridiagonal M-matrix system, then pick the pointwise
//! maximiser of `L^a V + f(·, a)`. The [`oracles`] module provides problems
//! with closed-form solutions and [`monte_carlo`] an independent
//! probabilistic check of computed payoffs.

pub mod cli;
pub mod driver;
pub mod error;
pub mod evaluation;
pub mod expr;
pub mod grid;
pub mod improvement;
pub mod monte_carlo;
pub mod oracles;
pub mod problem;
pub mod spec_file;

pub use driver::{check_monotone_sequence, run_pia, IterationRecord, PiaConfig, PiaReport, Termination};
pub use error::{Error, Result};
pub use evaluation::{evaluate_policy, lemma_residual};
pub use grid::{assemble_operator, solve_tridiagonal, Grid, GridFunction, GridPolicy, TridiagonalSystem};
pub use improvement::{hjb_residual, improve_policy, ImprovementResult};
pub use monte_carlo::{simulate_payoff, tanaka_joint_law, JointLawEstimate, PayoffEstimate, SimConfig};
pub use oracles::OracleProblem;
pub use problem::{
    apply_generator, validate_problem, ActionSpace, CoefficientField, ControlProblem, Domain, ValidationReport,
};
