use thiserror::Error;

/// Errors raised by the library. Each variant corresponds to a contract violation or
/// an input for which the requested object does not exist over the working field.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("ambient dimension mismatch: expected {expected}, found {found}")]
    AmbientMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear system has no solution")]
    NoSolution,
    #[error("subspace is not totally isotropic")]
    NotTotallyIsotropic,
    #[error("a required square root does not exist in the field (value {0})")]
    NonSquareScalar(String),
    #[error("subspace profiles differ: {0}")]
    ProfileMismatch(String),
    #[error("standard forms differ over this field")]
    FormMismatch,
    #[error("operation requires a finite field")]
    FieldNotFinite,
    #[error("enumeration too large: {count} items exceeds cap {cap}")]
    EnumerationTooLarge { count: String, cap: u64 },
    #[error("eigenvalues are not distinct or not in the field")]
    EigenvaluesNotDistinctOrNotRational,
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("no good basis exists for this configuration: {0}")]
    NoGoodBasis(String),
    #[error("stratum is empty: {0}")]
    EmptyStratum(String),
    #[error("no subspace with profile (d={d}, l={l}) found over this field")]
    NoSubspaceWithProfile { d: usize, l: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("all counts are zero")]
    AllZeroCounts,
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
