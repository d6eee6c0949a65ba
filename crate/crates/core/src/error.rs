use thiserror::Error;

/// Errors raised by grid construction, kernel evaluation and the diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("interval [{lo}, {hi}] is outside the grid range [{min}, {max}]")]
    OutOfRange { lo: f64, hi: f64, min: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the two-sided kernels are not defined at m = 0")]
    ZeroOrder,

    #[error("parameter lies on the critical parabola (distance {distance:e})")]
    OnBoundary { distance: f64 },

    #[error("parameter outside the admissible region: {0}")]
    OutsideRegion(String),

    #[error("ill-conditioned fit (condition number {condition:e})")]
    IllConditionedFit { condition: f64 },

    #[error("rank-deficient base operator (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("input violates a vanishing condition: {0}")]
    VanishingCondition(String),

    #[error("duplicate tau value {0}")]
    DuplicateTau(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
