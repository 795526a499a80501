//! Dense complex linear algebra substrate.
//!
//! Everything downstream (numerical ranges, relation calculus, spectral
//! diagnostics, Galerkin matrices) is phrased in terms of [`ComplexMatrix`]
//! and the handful of factorizations exposed here. Factorizations are
//! delegated to nalgebra; this module owns ordering, tolerances, and the
//! checks that turn its outputs into contract-level guarantees.

mod eigen;
mod json;
mod matrix;
pub mod random;
mod svd;

use thiserror::Error;

pub use eigen::{general_eigenvalues, general_eigs, hermitian_eigenvalues, hermitian_eigs, EigenPair};
pub use json::MatrixJson;
pub use matrix::{inner, normalized, rayleigh_quotient, vec_norm, ComplexMatrix};
pub use svd::{orthonormal_basis, schatten_norm, singular_values};

/// Relative symmetry tolerance used by [`hermitian_eigs`] callers that have no opinion.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-10;
/// Relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Relative eigen-residual budget.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumlinError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected {expected} entries, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("matrix is not Hermitian: ‖M − M^H‖ = {deviation:.3e} exceeds {tol:.3e}·‖M‖")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("{routine} did not converge")]
    NoConvergence { routine: &'static str },
    #[error("Schatten order must satisfy p ≥ 1, got {p}")]
    InvalidOrder { p: f64 },
}

impl NumlinError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::NotSquare { .. } => "numlin::NotSquare",
            Self::ShapeMismatch { .. } => "numlin::ShapeMismatch",
            Self::NonFinite { .. } => "numlin::NonFinite",
            Self::NotHermitian { .. } => "numlin::NotHermitian",
            Self::NoConvergence { .. } => "numlin::NoConvergence",
            Self::InvalidOrder { .. } => "numlin::InvalidOrder",
        }
    }
}
