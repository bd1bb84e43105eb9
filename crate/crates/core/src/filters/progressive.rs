use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{check_obs, innovation, repair_positive, solve_gain, CycleDiagnostics, FilterError, FilterState};
use crate::models::{ComponentModel, ObservationOperator};
use crate::sparse::{restricted_product, SparseColumns, SparseError, SparseSymMatrix, SparsityPattern};

/// Progressive EKF settings.
#[derive(Clone, Debug)]
pub struct ProgressiveParams {
    /// Finite-difference step.
    pub delta: f64,
    /// Inner-loop sub-steps per assimilation step.
    pub n_p: usize,
    /// Diagonal model-error variance.
    pub q: f64,
    pub pattern: Arc<SparsityPattern>,
}

impl ProgressiveParams {
    pub fn new(pattern: Arc<SparsityPattern>) -> Self {
        Self {
            delta: 1e-4,
            n_p: 1,
            q: 0.0,
            pattern,
        }
    }

    fn validate(&self, n: usize) -> Result<(), FilterError> {
        if self.pattern.dim() != n {
            return Err(FilterError::DimensionMismatch {
                what: "sparsity pattern",
                expected: n,
                found: self.pattern.dim(),
            });
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(FilterError::InvalidParameter(format!("delta = {}", self.delta)));
        }
        if self.n_p == 0 {
            return Err(FilterError::InvalidParameter("n_p must be at least 1".into()));
        }
        if !(self.q >= 0.0) {
            return Err(FilterError::InvalidParameter(format!("q = {}", self.q)));
        }
        Ok(())
    }
}

/// One covariance sub-step: `G + Gᵀ - P` on the pattern, where column `i` of
/// `G` is the secant `(M(x + δ·P[:, i]) - M(x)) / δ` evaluated at the rows of
/// pattern column `i` only.
fn propagate<M: ComponentModel + ?Sized>(
    model: &M,
    x: &[f64],
    forecast: &[f64],
    p: &SparseSymMatrix,
    delta: f64,
    n_p: usize,
) -> Result<SparseSymMatrix, FilterError> {
    let pattern = p.pattern().clone();
    let n = pattern.dim();
    let columns: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .with_min_len(8)
        .map(|i| {
            let mut perturbed = x.to_vec();
            let rows = pattern.column(i);
            for &r in &rows {
                perturbed[r] += delta * p.get(r, i);
            }
            let out = model.refined_step_components(&perturbed, &rows, n_p)?;
            Ok(out.iter().map(|(r, v)| (r, (v - forecast[r]) / delta)).collect())
        })
        .collect::<Result<_, FilterError>>()?;

    let mut g = SparseColumns::zeros(pattern.clone());
    for (i, col) in columns.into_iter().enumerate() {
        for (r, v) in col {
            g.set(r, i, v)?;
        }
    }
    let mut next = SparseSymMatrix::zeros(pattern);
    let slots: Vec<(usize, usize, usize)> = next.entries().collect();
    for (_, i, j) in slots {
        next.set(i, j, g.get(i, j) + g.get(j, i) - p.get(i, j))?;
    }
    Ok(next)
}

/// One cycle of the progressive EKF.
///
/// The background covariance is propagated without a square root through the
/// first-order relation `M P Mᵀ ≈ P + ΔM P + (ΔM P)ᵀ`, with `ΔM P` taken
/// by finite differences of the component model. With `n_p > 1` the
/// propagation is repeated along `n_p` refined sub-steps and `Q` is added
/// only after the last one.
pub fn progressive_ekf_cycle<M: ComponentModel + ?Sized>(
    state: &FilterState<SparseSymMatrix>,
    y_o: Option<&[f64]>,
    model: &M,
    obs: &ObservationOperator,
    params: &ProgressiveParams,
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
        return Err(SparseError::PatternMismatch.into());
    }
    check_obs(obs, n, y_o)?;
    let start = model.counter().get();

    // Steps 1-2: forecast and covariance along the inner backgrounds
    let mut x = state.xa.clone();
    let mut p = state.pa.clone();
    for _ in 0..params.n_p {
        let next = model.refined_step(&x, 1, params.n_p)?;
        p = propagate(model, &x, &next, &p, params.delta, params.n_p)?;
        x = next;
    }
    p.add_diagonal(params.q);
    let (xb, pb) = (x, p);

    let mut diagnostics = CycleDiagnostics::default();
    let (xa, mut pa) = match y_o {
        None => (xb, pb),
        Some(y) => {
            // Step 3: K = Pᵇ Hᵀ (H Pᵇ Hᵀ + R)⁻¹
            let idx = obs.indices();
            let m = idx.len();
            let pht = DMatrix::from_fn(n, m, |r, c| pb.get(r, idx[c]));
            let s = DMatrix::from_fn(m, m, |a, b| pb.get(idx[a], idx[b])) + obs.noise_cov();
            let gain = solve_gain(&pht, s)?;
            let yb = obs.observe(&xb)?;
            let innov = innovation(y, &yb);
            diagnostics.innovation_norm = innov.norm();
            let xa = DVector::from_vec(xb) + &gain * innov;
            // (I - K H) Pᵇ = Pᵇ - K (Pᵇ Hᵀ)ᵀ
            let correction = restricted_product(&gain, &pht.transpose(), &params.pattern)?;
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
