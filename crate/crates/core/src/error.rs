use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is rank deficient (smallest singular value {sigma_min:e}, largest {sigma_max:e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("feasible set is empty: {0}")]
    EmptyFeasibleSet(String),

    #[error("{what} did not converge within {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("numerical breakdown in linear program: {0}")]
    NumericalBreakdown(String),

    #[error("objective evaluation failed at iteration {iteration}, point {point:?}: {message}")]
    ObjectiveEvaluationFailure {
        iteration: usize,
        point: Vec<f64>,
        message: String,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("infeasible problem {0}: start point could not be projected onto the feasible set")]
    InfeasibleProblem(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
