//! Carathéodory–Fejér interpolation for matrix-valued Carathéodory–Herglotz
//! functions `Φ(z) = M_0 + 2 Σ z^n M_n` on the unit disk.
//!
//! * [`linalg`]: dense complex kernels (positivity, minimal factorizations,
//!   connecting isometries, Schur complements).
//! * [`toeplitz`]: block Toeplitz assembly and positivity profiles.
//! * [`extension`]: one-step extension through the operator ball and the
//!   central solution of the interpolation problem.
//! * [`herglotz`]: series and kernel evaluation, realizations, and the
//!   reduction `Φ = D + T0* φ T0`.
//! * [`format`]: canonical JSON interchange and run configuration.
//! * [`fixture`]: seeded random realizations and test points.

pub mod error;
pub mod extension;
pub mod fixture;
pub mod format;
pub mod herglotz;
pub mod linalg;
pub mod toeplitz;

pub use error::{Error, Result};
pub use extension::{central_step, extend, solve_cf, ExtensionStep};
pub use herglotz::{HerglotzSeries, Realization, ReducedForm};
pub use linalg::{CMatrix, CVector, PsdReport};
pub use num_complex::Complex64;
pub use toeplitz::{BlockToeplitz, CoefficientSequence};
