use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmacError {
    #[error("dimension {required} exceeds the configured cap {cap}")]
    DimensionCap { required: usize, cap: usize },

    #[error("enumeration of {required} items exceeds the cap {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("duplicate factor label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown factor label `{0}`")]
    UnknownLabel(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("negative eigenvalue {0:e} below tolerance")]
    NegativeEigenvalue(f64),

    #[error("trace {0} is not 1")]
    TraceNotOne(f64),

    #[error("not a projector: {0}")]
    NotProjector(String),

    #[error("POVM violates completeness: largest eigenvalue of the sum is {0}")]
    PovmOverComplete(f64),

    #[error("Kraus operators are not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QmacError>;
