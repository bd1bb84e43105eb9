//! Assimilation cycles: sparse UKF, progressive EKF, and the stochastic EnKF
//! and dense UKF baselines.
//!
//! Every cycle takes an optional observation; `None` runs the forecast half
//! only and returns the background as the new analysis.

mod dense_ukf;
mod enkf;
mod progressive;
mod sparse_ukf;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::models::{ModelError, ObservationOperator};
use crate::sparse::{self, SparseError, SparseSymMatrix};

pub use dense_ukf::dense_ukf_cycle;
pub use enkf::{enkf_cycle, ensemble_mean, gaspari_cohn, EnkfParams};
pub use progressive::{progressive_ekf_cycle, ProgressiveParams};
pub use sparse_ukf::{sparse_ukf_cycle, UkfParams};

/// Margin added above `|λ_min|` by the positivity repair.
pub const GAMMA_MARGIN: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("innovation covariance is not positive definite")]
    SingularInnovation,
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid filter parameter: {0}")]
    InvalidParameter(String),
    #[error("filter state became non-finite")]
    NonFinite,
}

/// Per-cycle bookkeeping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CycleDiagnostics {
    /// Diagonal shift applied to restore positive definiteness (0 if none).
    pub gamma: f64,
    /// Jitter the square-root factorization needed (0 if none).
    pub chol_jitter: f64,
    /// Scalar model entries evaluated during the cycle.
    pub evaluations: u64,
    /// Euclidean norm of `y_o - ȳᵇ`; zero on forecast-only cycles.
    pub innovation_norm: f64,
}

/// Analysis mean and covariance after a cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterState<C> {
    pub xa: Vec<f64>,
    pub pa: C,
    pub diagnostics: CycleDiagnostics,
}

impl<C> FilterState<C> {
    pub fn new(xa: Vec<f64>, pa: C) -> Self {
        Self {
            xa,
            pa,
            diagnostics: CycleDiagnostics::default(),
        }
    }
}

/// Adds `γI` with `γ = |λ_min| + 1e-8` when `e` has a negative eigenvalue;
/// returns the shift used.
pub fn repair_positive(e: &mut SparseSymMatrix) -> f64 {
    if e.to_dense().cholesky().is_some() {
        return 0.0;
    }
    let lambda = sparse::min_eigenvalue(e);
    if lambda < 0.0 {
        let gamma = lambda.abs() + GAMMA_MARGIN;
        e.add_diagonal(gamma);
        gamma
    } else {
        0.0
    }
}

/// Solves `K·S = B` for symmetric positive definite `S`.
pub(crate) fn solve_gain(b: &DMatrix<f64>, s: DMatrix<f64>) -> Result<DMatrix<f64>, FilterError> {
    let chol = s.cholesky().ok_or(FilterError::SingularInnovation)?;
    Ok(chol.solve(&b.transpose()).transpose())
}

pub(crate) fn check_obs(obs: &ObservationOperator, n: usize, y: Option<&[f64]>) -> Result<(), FilterError> {
    if obs.state_dim() != n {
        return Err(FilterError::DimensionMismatch {
            what: "observation operator",
            expected: n,
            found: obs.state_dim(),
        });
    }
    if let Some(y) = y {
        if y.len() != obs.obs_dim() {
            return Err(FilterError::DimensionMismatch {
                what: "observation",
                expected: obs.obs_dim(),
                found: y.len(),
            });
        }
    }
    Ok(())
}

pub(crate) fn innovation(y: &[f64], predicted: &[f64]) -> DVector<f64> {
    DVector::from_iterator(y.len(), y.iter().zip(predicted).map(|(a, b)| a - b))
}
