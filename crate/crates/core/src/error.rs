use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: argument outside domain ({detail})")]
    Domain { op: &'static str, detail: String },
    #[error("{op}: no convergence after {terms} terms")]
    NonConvergence { op: &'static str, terms: usize },
    #[error("{op}: result overflows f64")]
    Overflow { op: &'static str },
    #[error("cannot normalize a state with zero norm")]
    ZeroNorm,
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("truncation tail mass {tail:e} exceeds {limit:e}")]
    TruncationTail { tail: f64, limit: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{op}: singular point")]
    Singularity { op: &'static str },
    #[error("{op}: finite-difference step underflow")]
    StepUnderflow { op: &'static str },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}
