//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants are grouped into three classes that callers (notably the CLI)
/// map to distinct exit codes: input/usage problems, geometry failures and
/// shape mismatches. [`Error::class`] reports the class of a value.
#[derive(Debug, Error)]
pub enum Error {
    // -- input / usage --
    #[error("curvature must be a positive finite real, got {value}")]
    InvalidCurvature { value: f64 },
    #[error("projection margin must satisfy 0 < margin < 1, got {value}")]
    InvalidMargin { value: f64 },
    #[error("lambda must lie in [0, 1], got {value}")]
    InvalidLambda { value: f64 },
    #[error("invalid parameter: {detail}")]
    InvalidParameter { detail: String },
    #[error("not a valid tree: {detail}")]
    InvalidTree { detail: String },
    #[error("{what} limited to {limit}, got {got}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("triangle inequality violated at ({i},{j},{k}) by {excess}")]
    MetricViolation {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
    #[error("matrix is not a valid metric: {detail}")]
    InvalidMetric { detail: String },
    #[error("unknown set id {id:?}")]
    UnknownSetId { id: String },
    #[error("duplicate set id {id:?}")]
    DuplicateSetId { id: String },
    #[error("unsupported format_version {got}, expected {expected}")]
    FormatVersion { expected: u32, got: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),

    // -- geometry --
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("point numerically on the ball boundary (sqrt(c)*norm = {scaled_norm})")]
    BoundaryPoint { scaled_norm: f64 },
    #[error("vector outside the Klein ball (c*norm^2 = {scaled_norm_sq})")]
    OutsideKleinBall { scaled_norm_sq: f64 },
    #[error("point set must be nonempty")]
    EmptySet,
    #[error("word product overflowed on word {word:?}; consider row-normalizing the adjacency matrix")]
    NumericOverflow { word: String },

    // -- shape mismatches --
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("curvature mismatch: {left} vs {right}")]
    CurvatureMismatch { left: f64, right: f64 },
    #[error("set cardinality mismatch: {left} vs {right}; resample or pad sets upstream, or force lambda = 1")]
    CardinalityMismatch { left: usize, right: usize },
    #[error("matrix shape mismatch: {detail}")]
    MatrixShape { detail: String },
    #[error("adapter weight shapes inconsistent: {detail}")]
    AdapterShape { detail: String },
}

/// Coarse error classes; the CLI maps these to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input files, flags or parameters.
    Input,
    /// Numerical/geometric failure (boundary points, overflow, non-finite data).
    Geometry,
    /// Conformability failures (dimension, curvature, cardinality, weight shapes).
    Shape,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            NonFinite { .. } | BoundaryPoint { .. } | OutsideKleinBall { .. } | EmptySet
            | NumericOverflow { .. } => ErrorClass::Geometry,
            DimensionMismatch { .. }
            | CurvatureMismatch { .. }
            | CardinalityMismatch { .. }
            | MatrixShape { .. }
            | AdapterShape { .. } => ErrorClass::Shape,
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
