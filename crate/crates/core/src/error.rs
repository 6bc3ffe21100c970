use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is empty")]
    Empty,

    #[error("dimension {dim} exceeds the configured limit of {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e} exceeds {tolerance:e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e})")]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("symmetric eigensolver did not converge")]
    ConvergenceFailure,

    #[error("congruence transform is singular or has the wrong shape")]
    SingularTransform,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("weight must be non-zero")]
    ZeroWeight,

    #[error("weight {t} outside the admissible range {range}")]
    WeightOutOfRange { t: f64, range: &'static str },

    #[error("eigenvalue {0} is not positive")]
    NonpositiveEigenvalue(f64),

    #[error("input {0} is not positive")]
    NonpositiveInput(f64),

    #[error("determinant {det} of {which} is not 1 within {tolerance:e}")]
    DeterminantNotOne {
        which: &'static str,
        det: f64,
        tolerance: f64,
    },

    #[error("required relation {0} does not hold")]
    RelationAbsent(&'static str),

    #[error("invalid parameter schedule: {0}")]
    InvalidSchedule(String),

    #[error("tuple lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("tuple entry {0} is not positive")]
    NonpositiveEntry(f64),

    #[error("pinch indices ({i}, {j}) invalid for length {len}")]
    IndexOutOfRange { i: usize, j: usize, len: usize },

    #[error("pinch weight {0} outside [0, 1]")]
    InvalidPinchWeight(f64),

    #[error("target tuple is not log-majorized by the source")]
    NotLogMajorized,

    #[error("pinch chain exceeded {limit} steps")]
    ChainOverflow { limit: usize },

    #[error("pinch chain construction invariant violated at step {0}")]
    ChainInvariant(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::Empty => "Empty",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::NonFinite => "NonFinite",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::ConvergenceFailure => "ConvergenceFailure",
            Error::SingularTransform => "SingularTransform",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::ZeroWeight => "ZeroWeight",
            Error::WeightOutOfRange { .. } => "WeightOutOfRange",
            Error::NonpositiveEigenvalue(_) => "NonpositiveEigenvalue",
            Error::NonpositiveInput(_) => "NonpositiveInput",
            Error::DeterminantNotOne { .. } => "DeterminantNotOne",
            Error::RelationAbsent(_) => "RelationAbsent",
            Error::InvalidSchedule(_) => "InvalidSchedule",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::NonpositiveEntry(_) => "NonpositiveEntry",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidPinchWeight(_) => "InvalidPinchWeight",
            Error::NotLogMajorized => "NotLogMajorized",
            Error::ChainOverflow { .. } => "ChainOverflow",
            Error::ChainInvariant(_) => "ChainInvariant",
            Error::Parse(_) => "Parse",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }
}
