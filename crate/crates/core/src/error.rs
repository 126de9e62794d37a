use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the lab.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("component index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain violation: {0}")]
    Domain(String),

    /// One of the lower-bound construction inequalities failed; `lhs > rhs` was required.
    #[error("constraint `{constraint}` violated: need {lhs} > {rhs}")]
    ConstraintViolation {
        constraint: &'static str,
        lhs: f64,
        rhs: f64,
    },

    #[error("no root: left side {lhs} still exceeds right side {rhs} at the upper bracket end")]
    NoRoot { lhs: f64, rhs: f64 },

    #[error("left side is not monotone on the bracket: increase of {increase} near x = {at}")]
    NonMonotone { at: f64, increase: f64 },

    #[error("degenerate segment of length {0}")]
    DegenerateSegment(f64),

    #[error("alpha = {0} is not of the form 1/m")]
    InvalidAlpha(f64),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("trajectory is missing epoch snapshots")]
    MissingSnapshots,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
