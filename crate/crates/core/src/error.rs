use thiserror::Error;

/// Errors raised by the operator algebra and the divergence layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("symmetric eigendecomposition did not converge")]
    EigFailure,

    #[error("{what} is not positive (offending value {value:e})")]
    NotPositive { what: &'static str, value: f64 },

    #[error("shift must be strictly positive, got {0}")]
    NotShifted(f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("{what} is not positive semi-definite (eigenvalue {eigenvalue:e})")]
    NotPsd { what: &'static str, eigenvalue: f64 },

    #[error("{what} is degenerate (eigenvalue {eigenvalue:e} at or below clip)")]
    Degenerate { what: &'static str, eigenvalue: f64 },

    #[error("measures are mutually singular (max eigenvalue of S = {max_alpha})")]
    SingularPair { max_alpha: f64 },

    #[error("block is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
