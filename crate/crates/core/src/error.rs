use thiserror::Error;

/// Errors raised by the library. Numerical payloads are carried as `f64`
/// regardless of the scalar type used for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The two-form is degenerate at the point (|Δ| at or below tolerance).
    #[error("degenerate point: |delta| = {delta:e} <= {tolerance:e}")]
    DegeneratePoint {
        delta: f64,
        tolerance: f64,
        /// Group coordinates followed by body momenta.
        point: Vec<f64>,
    },

    #[error("inconsistent constraint stratum: {0}")]
    InconsistentStratum(String),

    #[error("constraint violated: {name} = {value:e}")]
    ConstraintViolation { name: String, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
