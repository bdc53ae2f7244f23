//! Dense complex linear algebra: matrices, SVD, eigenvalues, similarity tools.

mod eigen;
mod matrix;
pub mod random;
mod similarity;
mod svd;

use num_complex::Complex64 as C64;
use thiserror::Error;

pub use eigen::{eigenvalues_diagonalizable, multiset_distance};
pub use matrix::ComplexMatrix;
pub use similarity::{
    find_intertwiner, find_intertwiner_seeded, unitarize_similarity, unitarize_similarity_detailed,
    Unitarization, DEFAULT_CLUSTER_GAP,
};
pub use svd::{svd, Svd};

/// Largest number of entries a product matrix may have unless a cap is given.
pub const DEFAULT_ENTRY_CAP: usize = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not square ({}x{})", .0.0, .0.1)]
    NotSquare((usize, usize)),
    #[error("matrix is singular")]
    Singular,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
    #[error("result would have {entries} entries, above the cap of {cap}")]
    TooLarge { entries: u128, cap: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("zero matrix where a nonzero one is required")]
    ZeroMatrix,
}

/// Kronecker product with entry `(i·rows_b + k, j·cols_b + l) = a_ij · b_kl`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    tensor_product_capped(a, b, DEFAULT_ENTRY_CAP)
}

pub fn tensor_product_capped(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix, LinalgError> {
    let rows = a.rows() as u128 * b.rows() as u128;
    let cols = a.cols() as u128 * b.cols() as u128;
    let entries = rows * cols;
    if entries > cap as u128 {
        return Err(LinalgError::TooLarge { entries, cap });
    }
    let (rb, cb) = b.shape();
    Ok(ComplexMatrix::from_fn(rows as usize, cols as usize, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    }))
}

/// `min_θ ‖a − e^{iθ} b‖_F`, evaluated in closed form.
pub fn phase_invariant_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, LinalgError> {
    if a.shape() != b.shape() {
        return Err(LinalgError::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let nb = b.frobenius_norm();
    if nb == 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }
    let z = a.inner(b)?;
    let phase = if z.norm() > 0.0 { z.conj() / z.norm() } else { C64::new(1.0, 0.0) };
    Ok((a - &b.scale(phase)).frobenius_norm())
}
