use std::fmt;

/// Which density-operator invariant a matrix failed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Violation {
    /// Largest entry of `M - M†`.
    NotHermitian(f64),
    /// Most negative eigenvalue.
    NotPositive(f64),
    /// Trace that should have been one.
    NotNormalized(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian(d) => write!(f, "not Hermitian (max |M - M^dag| = {d:e})"),
            Violation::NotPositive(l) => write!(f, "not positive semidefinite (min eigenvalue {l:e})"),
            Violation::NotNormalized(t) => write!(f, "not unit trace (trace {t})"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid state: {0}")]
    Invariant(Violation),
    #[error("dimension {dim} exceeds the cap of {cap}")]
    SizeCap { dim: usize, cap: usize },
    #[error("construction failed: {condition} (margin {margin:e})")]
    Construction { condition: String, margin: f64 },
    #[error("no sufficient copy count up to {limit}: {detail}")]
    CopiesInsufficient { limit: usize, detail: String },
    #[error("conversion refused: {0}")]
    Refused(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn construction(condition: impl Into<String>, margin: f64) -> Self {
        Error::Construction { condition: condition.into(), margin }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
