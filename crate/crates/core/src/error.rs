use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "matrix is not positive semidefinite: eigenvalue {eigenvalue:e} is below -{tolerance:e}"
    )]
    NegativeEigenvalue { eigenvalue: f64, tolerance: f64 },

    #[error("factorizations disagree: relative mismatch {mismatch:e} exceeds {tolerance:e}")]
    InconsistentFactorization { mismatch: f64, tolerance: f64 },

    #[error("leading block is numerically singular (smallest singular value {sigma_min:e})")]
    SingularBlock { sigma_min: f64 },

    #[error("Toeplitz data is not positive at truncation level {level} (min eigenvalue {min_eigenvalue:e})")]
    Infeasible { level: usize, min_eigenvalue: f64 },

    #[error("shifted Toeplitz matrix is numerically singular at order {order} (eps = {eps:e})")]
    Conditioning { order: usize, eps: f64 },

    #[error("contraction has operator norm {norm} > 1")]
    OutOfBall { norm: f64 },

    #[error("point {z} lies outside the evaluation disk of radius {radius}")]
    Domain { z: Complex64, radius: f64 },

    #[error("need {needed} coefficients but only {available} are available")]
    InsufficientCoefficients { needed: usize, available: usize },

    #[error("coefficient M_{index} does not factor through the range of T0 (residual {residual:e} > {tolerance:e})")]
    RangeCompatibility {
        index: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid realization: {0}")]
    Realization(String),

    #[error("numerical check failed: {0}")]
    Tolerance(String),
}
