use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants fall into two families that the command-line tool maps onto
/// distinct exit codes: violated preconditions (bad input) and numerical
/// failures (the input was valid but the computation could not reach the
/// requested precision).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grids do not share a common configuration")]
    MismatchedGrids,

    #[error("problem size {size} exceeds the limit {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("missing envelope or moment data: {0}")]
    InsufficientCoverage(String),

    #[error("box too small: mass defect {defect:e} exceeds {limit:e}")]
    Precision { defect: f64, limit: f64 },

    #[error("spectral differentiation of order {order} is unstable at this resolution (edge ratio {ratio:e})")]
    UnstableDifferentiation { order: usize, ratio: f64 },

    #[error("derivative of order {order} has no exponential tail (fitted slope {slope}); exponential-regime hypotheses not certified")]
    NonExponentialTail { order: usize, slope: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    #[error("quadrature error estimate {err:e} above tolerance {tol:e} after maximal refinement")]
    Unresolved { err: f64, tol: f64 },

    #[error("constant {0} is not finite")]
    NonFinite(String),

    #[error("rate fit needs at least 3 rows with 0 < A < 1, found {0}")]
    TooFewRows(usize),

    #[error("{failed} of {total} sweep rows failed")]
    SweepFailed { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for numerical failures, false for precondition violations.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Precision { .. }
                | Error::UnstableDifferentiation { .. }
                | Error::NonExponentialTail { .. }
                | Error::NotConverged { .. }
                | Error::Unresolved { .. }
                | Error::NonFinite(_)
                | Error::SweepFailed { .. }
        )
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
