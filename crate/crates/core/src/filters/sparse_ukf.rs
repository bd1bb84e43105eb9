use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{check_obs, innovation, repair_positive, solve_gain, CycleDiagnostics, FilterError, FilterState};
use crate::models::{ComponentModel, ObservationOperator};
use crate::sparse::{
    incomplete_cholesky, merge, restricted_outer_accumulate, restricted_product, SparseSymMatrix, SparsityPattern,
};

/// Sparse UKF settings. `q` is the diagonal of the model-error covariance.
#[derive(Clone, Debug)]
pub struct UkfParams {
    pub kappa: f64,
    pub q: f64,
    pub pattern: Arc<SparsityPattern>,
}

impl UkfParams {
    pub fn new(pattern: Arc<SparsityPattern>) -> Self {
        Self {
            kappa: 0.0,
            q: 0.0,
            pattern,
        }
    }

    /// `(w₀, wᵢ)` for a state of dimension `n`.
    pub fn weights(&self, n: usize) -> (f64, f64) {
        let nk = n as f64 + self.kappa;
        (self.kappa / nk, 0.5 / nk)
    }

    pub(crate) fn validate(&self, n: usize) -> Result<(), FilterError> {
        if self.pattern.dim() != n {
            return Err(FilterError::DimensionMismatch {
                what: "sparsity pattern",
                expected: n,
                found: self.pattern.dim(),
            });
        }
        if !(n as f64 + self.kappa > 0.0) {
            return Err(FilterError::InvalidParameter(format!("n + kappa must be positive, kappa = {}", self.kappa)));
        }
        if !(self.q >= 0.0) {
            return Err(FilterError::InvalidParameter(format!("q = {}", self.q)));
        }
        Ok(())
    }
}

/// One cycle of the sparse unscented Kalman filter.
///
/// σ-point perturbations are the columns of the incomplete Cholesky factor
/// of `(n+κ)·Pᵃ`; each perturbed state is forecast only at the pattern rows
/// of its column and merged into the center forecast. The analysis
/// covariance is evaluated on the pattern and shifted by `γI` if indefinite.
pub fn sparse_ukf_cycle<M: ComponentModel + ?Sized>(
    state: &FilterState<SparseSymMatrix>,
    y_o: Option<&[f64]>,
    model: &M,
    obs: &ObservationOperator,
    params: &UkfParams,
) -> Result<FilterState<SparseSymMatrix>, FilterError> {
    let n = model.dim();
    if state.xa.len() != n {
        return Err(FilterError::DimensionMismatch {
            what: "analysis state",
            expected: n,
            found: state.xa.len(),
        });
    }
    params.validate(n)?;
    if **state.pa.pattern() != *params.pattern {
        return Err(crate::sparse::SparseError::PatternMismatch.into());
    }
    check_obs(obs, n, y_o)?;
    let pattern = &params.pattern;
    let start = model.counter().get();

    // Step 1: σ-points and forecast
    let sqrt = incomplete_cholesky(&state.pa, n as f64 + params.kappa)?;
    let center = model.step(&state.xa)?;
    let forecasts: Vec<Vec<f64>> = (0..2 * n)
        .into_par_iter()
        .with_min_len(8)
        .map(|k| {
            let (col, sign) = if k < n { (k, 1.0) } else { (k - n, -1.0) };
            let mut x = state.xa.clone();
            for (i, v) in sqrt.factor.column(col) {
                x[i] += sign * v;
            }
            let out = pattern.column(col);
            let partial = model.step_components(&x, &out)?;
            Ok(merge(&partial, &center)?)
        })
        .collect::<Result<_, FilterError>>()?;

    let (w0, wi) = params.weights(n);
    let mut weights = Vec::with_capacity(2 * n + 1);
    weights.push(w0);
    weights.resize(2 * n + 1, wi);
    let members: Vec<&[f64]> = std::iter::once(center.as_slice())
        .chain(forecasts.iter().map(Vec::as_slice))
        .collect();

    let mut mean = vec![0.0; n];
    for (x, &w) in members.iter().zip(&weights) {
        for (m, v) in mean.iter_mut().zip(x.iter()) {
            *m += w * v;
        }
    }
    let obs_members: Vec<Vec<f64>> = members.iter().map(|x| obs.observe(x)).collect::<Result<_, _>>()?;
    let m = obs.obs_dim();
    let mut y_mean = vec![0.0; m];
    for (y, &w) in obs_members.iter().zip(&weights) {
        for (a, b) in y_mean.iter_mut().zip(y) {
            *a += w * b;
        }
    }

    // Step 2: background covariances
    let deviations: Vec<Vec<f64>> = members
        .iter()
        .map(|x| x.iter().zip(&mean).map(|(a, b)| a - b).collect())
        .collect();
    let mut pb = restricted_outer_accumulate(&deviations, &weights, pattern)?;
    pb.add_diagonal(params.q);

    let mut diagnostics = CycleDiagnostics {
        chol_jitter: sqrt.jitter,
        ..Default::default()
    };

    let (xa, mut pa) = match y_o {
        None => (mean, pb),
        Some(y) => {
            let mut pxy = DMatrix::zeros(n, m);
            let mut pyy = obs.noise_cov();
            for ((dx, yk), &w) in deviations.iter().zip(&obs_members).zip(&weights) {
                let dy: Vec<f64> = yk.iter().zip(&y_mean).map(|(a, b)| a - b).collect();
                for c in 0..m {
                    let wd = w * dy[c];
                    for r in 0..n {
                        pxy[(r, c)] += wd * dx[r];
                    }
                    for r in 0..m {
                        pyy[(r, c)] += wd * dy[r];
                    }
                }
            }

            // Step 3: gain and analysis
            let gain = solve_gain(&pxy, pyy)?;
            let innov = innovation(y, &y_mean);
            diagnostics.innovation_norm = innov.norm();
            let xa = DVector::from_vec(mean) + &gain * innov;
            let correction = restricted_product(&gain, &pxy.transpose(), pattern)?;
            let mut pa = pb;
            pa.axpy(-1.0, &correction)?;
            (xa.as_slice().to_vec(), pa)
        }
    };
    diagnostics.gamma = repair_positive(&mut pa);
    diagnostics.evaluations = model.counter().get() - start;

    if !xa.iter().all(|v| v.is_finite()) || !pa.is_finite() {
        return Err(FilterError::NonFinite);
    }
    Ok(FilterState { xa, pa, diagnostics })
}
