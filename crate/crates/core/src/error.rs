use std::fmt;

/// A range or schema problem located by a field path such as `model.t`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl FieldError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("spectral parameter lies on the unit circle (|z| = {0})")]
    OnUnitCircle(f64),

    #[error("singular factorization at pivot {0}")]
    Singular(usize),

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DenseLimit { dim: usize, limit: usize },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: String, message: String },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("exceptional spectral parameter at row {row}: pivot modulus {pivot:e}")]
    Exceptional { row: usize, pivot: f64 },

    #[error("wavefront reached the boundary: boundary mass {0:e}")]
    BoundaryContamination(f64),

    #[error("validation failed: {}", join(.0))]
    Validation(Vec<FieldError>),

    #[error("{0}")]
    Mismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn join(errs: &[FieldError]) -> String {
    errs.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn invalid(name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
