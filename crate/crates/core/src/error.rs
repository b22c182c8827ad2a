use thiserror::Error;

/// Errors raised by the solver and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain ({left}, {right}): endpoints must be finite with left < right")]
    InvalidDomain { left: f64, right: f64 },

    #[error("invalid action space: {0}")]
    InvalidActionSpace(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("coefficient `{name}` is not finite at x = {x}, a = {a} (got {value})")]
    NonFiniteCoefficient {
        name: &'static str,
        x: f64,
        a: f64,
        value: f64,
    },

    #[error("at grid node {node} with action {action}: {source}")]
    AtNode {
        node: usize,
        action: f64,
        source: Box<Error>,
    },

    #[error("tridiagonal pivot {pivot} at row {row} is not positive; the assembled system is not an M-matrix")]
    PivotBreakdown { row: usize, pivot: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("point {x} lies outside [{left}, {right}]")]
    OutOfDomain { x: f64, left: f64, right: f64 },

    #[error("action {action} at node {node} is not in the action space")]
    ActionOutOfSpace { node: usize, action: f64 },

    #[error("PIA iteration {iteration}: {source}")]
    AtIteration { iteration: usize, source: Box<Error> },

    #[error("Monte Carlo path {path} at t = {time}: {source}")]
    AtPath {
        path: usize,
        time: f64,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_node(self, node: usize, action: f64) -> Self {
        Error::AtNode {
            node,
            action,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
