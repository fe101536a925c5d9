//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("symmetry violation in {tensor} at {index}: {lhs} vs {rhs}")]
    SymmetryViolation {
        tensor: &'static str,
        index: String,
        lhs: f64,
        rhs: f64,
    },
    #[error("{tensor} is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite {
        tensor: &'static str,
        min_eigenvalue: f64,
    },
    #[error("conductivity tensor is not invertible (pivot {pivot})")]
    NoninvertibleConductivity { pivot: f64 },
    #[error("scalar {name} must be positive (got {value})")]
    NonpositiveScalar { name: &'static str, value: f64 },
    /// Several validation failures at once.
    #[error("material validation failed: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidMaterial(Vec<Error>),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("non-finite field value at t = {t}")]
    NonfiniteField { t: f64 },
    #[error("invalid boundary partition: {0}")]
    InvalidPartition(String),
    #[error("ghost solve singular at the {end} endpoint")]
    GhostSolveSingular { end: &'static str },
    #[error("no thermal front detected")]
    NoFront,
    #[error("degenerate reference energy {0}")]
    Degenerate(f64),
    #[error("requested window [{t1}, {t2}] outside history [0, {t_end}]")]
    Range { t1: f64, t2: f64, t_end: f64 },
    #[error("variation violates its constraints: {0}")]
    ConstraintViolation(String),
    #[error("scenarios are not compatible: {0}")]
    ScenarioMismatch(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("unknown key {0}")]
    UnknownKey(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code for the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SymmetryViolation { .. } => "SYMMETRY_VIOLATION",
            Error::NotPositiveDefinite { .. } => "NOT_POSITIVE_DEFINITE",
            Error::NoninvertibleConductivity { .. } => "NONINVERTIBLE_CONDUCTIVITY",
            Error::NonpositiveScalar { .. } => "NONPOSITIVE_SCALAR",
            Error::InvalidMaterial(_) => "INVALID_MATERIAL",
            Error::SizeMismatch { .. } => "SIZE_MISMATCH",
            Error::NonfiniteField { .. } => "NONFINITE_FIELD",
            Error::InvalidPartition(_) => "INVALID_PARTITION",
            Error::GhostSolveSingular { .. } => "GHOST_SOLVE_SINGULAR",
            Error::NoFront => "NO_FRONT",
            Error::Degenerate(_) => "DEGENERATE",
            Error::Range { .. } => "RANGE",
            Error::ConstraintViolation(_) => "CONSTRAINT_VIOLATION",
            Error::ScenarioMismatch(_) => "SCENARIO_MISMATCH",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::Validation { .. } => "VALIDATION_ERROR",
            Error::UnknownKey(_) => "UNKNOWN_KEY",
            Error::Io(_) => "IO_ERROR",
        }
    }
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
