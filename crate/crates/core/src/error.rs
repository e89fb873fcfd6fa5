use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("characteristic polynomial is not monic")]
    NotMonic,

    #[error("characteristic polynomial has a zero root (constant term is 0)")]
    ZeroRoot,

    #[error("expected {expected} initial terms, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("polynomial degree {got} is below the required minimum {min}")]
    DegreeTooSmall { min: usize, got: usize },

    #[error("recurrence is degenerate: {0}")]
    Degenerate(String),

    #[error("precision must be a positive rational")]
    InvalidPrecision,

    #[error("certification failed after reaching {bits} bits of working precision")]
    PrecisionExhausted { bits: u64 },

    #[error("polynomial is not squarefree")]
    NotSquarefree,

    #[error("node values must be pairwise distinct")]
    DuplicateNode,

    #[error("node values must be nonzero")]
    ZeroNode,

    #[error("sequence term S_{index} = {value} is not an integer")]
    NonIntegralSequence { index: u64, value: String },

    #[error("Cramer certificate failed at n = {n}: {reason}")]
    CertificateFailure { n: u64, reason: String },

    #[error("closed form disagrees with exact determinant at n = {n}: exact {exact}, closed form {closed}")]
    Mismatch { n: u64, exact: String, closed: String },

    #[error("invalid rational literal {0:?}")]
    InvalidRational(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
