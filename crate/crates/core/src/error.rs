use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Hurst parameter must lie strictly inside (0, 1), got {0}")]
    InvalidHurst(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Cholesky sampler capped at n = {cap}, requested {n}")]
    CholeskyCapExceeded { n: usize, cap: usize },

    #[error("Toeplitz covariance is not numerically positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("circulant embedding has eigenvalue {value} below tolerance (max eigenvalue {max})")]
    NegativeEigenvalue { value: f64, max: f64 },

    #[error("sampling method unavailable in this build")]
    MethodUnavailable,

    #[error("simulation diverged at step {step}")]
    Diverged { step: usize },

    #[error("quadrature did not converge: estimated error {achieved:e} > tolerance {tolerance:e}")]
    QuadratureFailed { achieved: f64, tolerance: f64 },

    #[error("degenerate least-squares design")]
    DegenerateDesign,

    #[error("overlapping regions in catalog: `{0}` and `{1}`")]
    OverlappingRegions(alloc::string::String, alloc::string::String),

    #[error("path too short: need at least {min} points, got {got}")]
    PathTooShort { min: usize, got: usize },
}
