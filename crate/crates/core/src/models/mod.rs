//! Component-based dynamical models and the linear observation operator.

mod linear;
mod lorenz96;
mod observation;

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::sparse::SparseVector;

pub use linear::LinearModel;
pub use lorenz96::{lorenz96_rhs, rk4_step, Lorenz96, Lorenz96Config};
pub use observation::ObservationOperator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("state has length {found}, model dimension is {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("output index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("input does not cover the dependency stencil: index {missing} required for output {output}")]
    StencilNotCovered { output: usize, missing: usize },
    #[error("Lorenz-96 needs n >= 4, got {0}")]
    TooSmall(usize),
    #[error("invalid refinement: sub-step {s} of {n_p}")]
    InvalidRefinement { s: usize, n_p: usize },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
}

/// Running tally of scalar output entries a model has evaluated.
#[derive(Debug, Default)]
pub struct EvalCounter(AtomicU64);

impl EvalCounter {
    pub fn add(&self, k: usize) {
        self.0.fetch_add(k as u64, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}

/// A discrete model `x(k) = M(x(k-1))` that can evaluate any subset of output
/// entries from the inputs in their dependency stencil.
///
/// Implementors provide uncounted kernels for one sub-step of length
/// `Δt / n_p`; the provided methods validate inputs and keep the evaluation
/// counter exact (one per output entry).
pub trait ComponentModel: Send + Sync {
    fn dim(&self) -> usize;

    fn counter(&self) -> &EvalCounter;

    /// Indices of the inputs needed to compute output entry `i` of one step.
    fn dependency_stencil(&self, i: usize) -> Vec<usize>;

    /// One sub-step of length `Δt / n_p` on a full state.
    fn advance(&self, x: &[f64], n_p: usize) -> Vec<f64>;

    /// Entries `out` (sorted, unique, in range) of [`ComponentModel::advance`],
    /// in the order of `out`. Inputs outside the dependency stencils of `out`
    /// must not influence the result.
    fn advance_components(&self, x: &[f64], out: &[usize], n_p: usize) -> Vec<f64>;

    /// The full model step.
    fn step(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_len(x.len())?;
        self.counter().add(self.dim());
        Ok(self.advance(x, 1))
    }

    /// Evaluates only the entries `out` of one step from a dense input.
    fn step_components(&self, x: &[f64], out: &[usize]) -> Result<SparseVector, ModelError> {
        self.refined_step_components(x, out, 1)
    }

    /// As [`ComponentModel::step_components`], but from a sparse input whose
    /// index set must cover the stencil of every requested output.
    fn step_components_sparse(&self, x: &SparseVector, out: &[usize]) -> Result<SparseVector, ModelError> {
        self.check_len(x.dim())?;
        for &o in out {
            if o >= self.dim() {
                return Err(ModelError::IndexOutOfRange { index: o, dim: self.dim() });
            }
            if let Some(missing) = self.dependency_stencil(o).into_iter().find(|&s| !x.contains(s)) {
                return Err(ModelError::StencilNotCovered { output: o, missing });
            }
        }
        self.step_components(&x.to_dense(), out)
    }

    /// `s` consecutive sub-steps of length `Δt / n_p`; `refined_step(x, n_p, n_p)`
    /// equals `step(x)` exactly when `n_p == 1`.
    fn refined_step(&self, x: &[f64], s: usize, n_p: usize) -> Result<Vec<f64>, ModelError> {
        self.check_len(x.len())?;
        if n_p == 0 || s > n_p {
            return Err(ModelError::InvalidRefinement { s, n_p });
        }
        let mut state = x.to_vec();
        for _ in 0..s {
            self.counter().add(self.dim());
            state = self.advance(&state, n_p);
        }
        Ok(state)
    }

    /// Entries `out` of one sub-step of length `Δt / n_p`.
    fn refined_step_components(&self, x: &[f64], out: &[usize], n_p: usize) -> Result<SparseVector, ModelError> {
        self.check_len(x.len())?;
        if n_p == 0 {
            return Err(ModelError::InvalidRefinement { s: 1, n_p });
        }
        let mut idx = out.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim()) {
            return Err(ModelError::IndexOutOfRange { index: bad, dim: self.dim() });
        }
        if idx.is_empty() {
            return Ok(SparseVector::empty(self.dim()));
        }
        self.counter().add(idx.len());
        let values = self.advance_components(x, &idx, n_p);
        Ok(SparseVector::new(self.dim(), idx.into_iter().zip(values)).expect("indices validated"))
    }

    fn check_len(&self, len: usize) -> Result<(), ModelError> {
        if len != self.dim() {
            Err(ModelError::DimensionMismatch { expected: self.dim(), found: len })
        } else {
            Ok(())
        }
    }
}
