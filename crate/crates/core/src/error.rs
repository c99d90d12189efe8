use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("point {0} lies outside the space")]
    Domain(String),

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    #[error("lift is infeasible: sigma charges cell {cell} which has zero base mass")]
    InfeasibleLift { cell: usize },

    #[error("optimizer failed to converge after {iterations} iterations (residual {residual:e})")]
    OptimizerFailure { iterations: usize, residual: f64 },

    #[error("resource guard exceeded: {0}")]
    Resource(String),

    #[error("internal consistency violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
