use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("covariance matrix is not positive semi-definite ({0})")]
    CovarianceNotPsd(String),

    #[error("crop `{crop}` would drive {channel} non-positive at cell ({x}, {y}): 1 + f*alpha = {factor}")]
    ForceBound {
        crop: String,
        channel: &'static str,
        x: usize,
        y: usize,
        factor: f64,
    },

    #[error("year {year} out of range (state holds {slices} slices)")]
    YearOutOfRange { year: usize, slices: usize },

    #[error("time slice 0 is immutable after initialization")]
    InitialSliceImmutable,

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("grid mismatch: expected {expected}, got {actual}")]
    GridMismatch { expected: String, actual: String },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("need at least {min} permutations, got {got}")]
    TooFewPermutations { min: usize, got: usize },

    #[error("field has zero variance; Moran's I is undefined")]
    ZeroVariance,

    #[error("unknown crop `{0}`")]
    UnknownCrop(String),

    #[error("duplicate name `{0}`")]
    Duplicate(String),

    #[error("empty {0}")]
    Empty(&'static str),

    /// Configuration failed to parse or validate; `path` is the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from user input rather than execution.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config { .. } => true,
            Error::Scenario { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
