use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} out of range for a tuple of length {len}")]
    InvalidIndex { index: usize, len: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("the polynomial F vanishes identically")]
    ZeroPolynomial,

    #[error("recursion is underdetermined for n = {0}")]
    Underdetermined(usize),

    #[error("vector field is singular at s = {s} (F = 0)")]
    SingularField { s: f64 },

    #[error("invalid start: {0}")]
    InvalidStart(String),

    #[error("s = {s} lies on or outside the domain of the closed-form family")]
    DomainBoundary { s: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("angle mismatch: required theta = {required} (e^(i theta) i^n = -i)")]
    AngleMismatch { required: f64 },

    #[error("lost the tracked cubic root at s = {s}")]
    BranchLoss { s: f64 },

    #[error("tracked cubic roots collide at s = {s} (gap {gap:e})")]
    BranchCollision { s: f64, gap: f64 },

    #[error("degenerate state at s = {s}: {reason}")]
    Degenerate { s: f64, reason: String },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
