//! Sparse matrices and a direct solver sized for 2D saddle point systems.

mod csr;
mod lu;
pub mod ordering;

pub use csr::SparseMatrix;
pub use lu::{lu_factor, lu_factor_ordered, lu_solve, LuFactors, PIVOT_THRESHOLD, SINGULAR_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SparseError {
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("malformed CSR arrays: {0}")]
    MalformedCsr(&'static str),
    #[error("matrix is {nrows}x{ncols}, expected square")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ordering is not a permutation")]
    InvalidPermutation,
    #[error("numerically singular at elimination step {step}: pivot row {row} has |pivot| = {pivot:e}")]
    Singular { row: usize, step: usize, pivot: f64 },
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
