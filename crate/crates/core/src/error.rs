use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical building blocks.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("generator matrix is singular or too ill-conditioned (condition estimate {cond:e}, cap {cap:e})")]
    IllConditionedGenerators { cond: f64, cap: f64 },

    #[error("{0} is singular to working precision")]
    Singular(&'static str),

    #[error("eigenvalue iteration did not converge for a {0}x{0} matrix")]
    EigenSolverFailed(usize),

    #[error("matrix exponential overflowed (norm of M*t = {0:e})")]
    ExpmOverflow(f64),

    #[error("Sylvester equation is ill-posed: min |lambda_D + lambda_A| = {min_sum:e} below threshold {threshold:e}")]
    IllPosedSylvester { min_sum: f64, threshold: f64 },

    #[error("{0} is not stable, the integral representation diverges")]
    NotStable(&'static str),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("bound direction r is not in the interior of the cone (margin {margin:e})")]
    NotInterior { margin: f64 },

    #[error("numerical consistency failure: {0}")]
    NumericalConsistency(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
