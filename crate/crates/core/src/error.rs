use thiserror::Error;

/// Errors surfaced by the optimization and diagnostics routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bisection did not converge after {iterations} iterations (last residual {residual:e}); the regularizer prox is likely inconsistent")]
    BisectionFailed { iterations: usize, residual: f64 },

    #[error("proximal inner solver exceeded {iterations} iterations (last residual {residual:e})")]
    InnerSolveFailed { iterations: usize, residual: f64 },

    #[error("step-size condition violated: {0}")]
    StepCondition(String),

    #[error("dimension {dim} exceeds the brute-force search limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
