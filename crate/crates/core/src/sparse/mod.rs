//! Fixed-pattern sparse symmetric linear algebra.
//!
//! All matrices here live on a cyclic band [`SparsityPattern`]. Operations
//! evaluate only admissible entries; everything off the pattern is an exact
//! zero and is never computed.

mod factor;
mod ops;
mod pattern;
mod storage;

use thiserror::Error;

pub use factor::{incomplete_cholesky, min_eigenvalue, IncompleteCholesky, JITTER_RETRIES, JITTER_START};
pub use ops::{merge, restricted_outer_accumulate, restricted_product};
pub use pattern::SparsityPattern;
pub use storage::{SparseColumns, SparseSymMatrix, SparseVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparseError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state dimension must be positive")]
    EmptyDimension,
    #[error("nonzeros per column must be odd and at most n (n = {n}, nsp = {nsp})")]
    InvalidNsp { n: usize, nsp: usize },
    #[error("entry ({row}, {col}) is outside the sparsity pattern")]
    OutsidePattern { row: usize, col: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("duplicate index {0}")]
    DuplicateIndex(usize),
    #[error("operands use different sparsity patterns")]
    PatternMismatch,
    #[error("non-positive pivot at column {column} with jitter {jitter:e}")]
    NotPositiveDefinite { column: usize, jitter: f64 },
}
