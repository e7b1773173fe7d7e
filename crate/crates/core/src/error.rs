use thiserror::Error;

/// Errors raised by the geometry, measure and statistics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ambient dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("vector norm {0:e} is below 1e-6 and cannot be normalized")]
    DegenerateVector(f64),

    #[error("non-finite coordinate or weight")]
    NonFinite,

    #[error("metric exponent must lie in (0, 1], got {0}")]
    InvalidMetricPower(f64),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("point not in open hemisphere")]
    NotInHemisphere,

    #[error("invariant part defined for positive measures")]
    NegativeWeight,

    #[error("expected a probability measure (nonnegative weights summing to 1)")]
    NotProbability,

    #[error("strictness undefined with repeated points")]
    RepeatedPoints,

    #[error("fingerprints were taken over different direction sets")]
    DirectionMismatch,

    #[error("degenerate support: no pole avoids every atom")]
    DegenerateSupport,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
