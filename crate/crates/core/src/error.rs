use thiserror::Error;

/// Errors raised by the numerical kernels and the inclusion pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("symmetric eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("triangular factor is singular at diagonal index {index}")]
    SingularFactor { index: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("empty input")]
    Empty,

    #[error("beta = {beta} lies outside the dual domain (lower limit {lower}, open: {open})")]
    OutOfDomain { beta: f64, lower: f64, open: bool },

    #[error("ellipsoids are not touching: |l* + 1| = {gap:e} exceeds {tol:e}")]
    NotTouching { gap: f64, tol: f64 },

    #[error("contact-point quadratic has no real root (discriminant {discriminant:e})")]
    NoRealRoot { discriminant: f64 },

    #[error("disturbance vector is zero")]
    ZeroDisturbance,

    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
