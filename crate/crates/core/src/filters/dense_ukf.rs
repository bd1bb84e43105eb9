use nalgebra::{DMatrix, DVector};

use super::{check_obs, innovation, solve_gain, CycleDiagnostics, FilterError, FilterState};
use crate::models::{ComponentModel, ObservationOperator};
use crate::sparse::{SparseError, JITTER_RETRIES, JITTER_START};

/// Cholesky factor with the same jitter schedule as the incomplete factor.
fn cholesky_with_jitter(p: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64), FilterError> {
    let n = p.nrows();
    let diag_max = p.diagonal().iter().map(|d| d.abs()).fold(0.0, f64::max);
    let start = JITTER_START * if diag_max > 0.0 && diag_max.is_finite() { diag_max } else { 1.0 };
    let mut jitter = 0.0;
    for attempt in 0..=JITTER_RETRIES {
        if attempt == 1 {
            jitter = start;
        } else if attempt > 1 {
            jitter *= 2.0;
        }
        let shifted = p + DMatrix::identity(n, n) * jitter;
        if let Some(c) = shifted.cholesky() {
            return Ok((c.l(), jitter));
        }
    }
    Err(SparseError::NotPositiveDefinite { column: 0, jitter }.into())
}

/// One cycle of the textbook UKF on a dense covariance, with σ-points from
/// the Cholesky factor of `(n+κ)·Pᵃ`. `q` is the diagonal model-error
/// variance.
pub fn dense_ukf_cycle<M: ComponentModel + ?Sized>(
    state: &FilterState<DMatrix<f64>>,
    y_o: Option<&[f64]>,
    model: &M,
    obs: &ObservationOperator,
    kappa: f64,
    q: f64,
) -> Result<FilterState<DMatrix<f64>>, FilterError> {
    let n = model.dim();
    if state.xa.len() != n || state.pa.nrows() != n || state.pa.ncols() != n {
        return Err(FilterError::DimensionMismatch {
            what: "dense UKF state",
            expected: n,
            found: state.xa.len(),
        });
    }
    if !(n as f64 + kappa > 0.0) {
        return Err(FilterError::InvalidParameter(format!("n + kappa must be positive, kappa = {kappa}")));
    }
    check_obs(obs, n, y_o)?;
    let start = model.counter().get();

    let nk = n as f64 + kappa;
    let (l, jitter) = cholesky_with_jitter(&(&state.pa * nk))?;
    let mut sigma = Vec::with_capacity(2 * n + 1);
    sigma.push(state.xa.clone());
    for sign in [1.0, -1.0] {
        for j in 0..n {
            sigma.push((0..n).map(|i| state.xa[i] + sign * l[(i, j)]).collect::<Vec<f64>>());
        }
    }
    let members: Vec<Vec<f64>> = sigma.iter().map(|x| model.step(x)).collect::<Result<_, _>>()?;

    let mut weights = vec![0.5 / nk; 2 * n + 1];
    weights[0] = kappa / nk;

    let mut mean = vec![0.0; n];
    for (x, &w) in members.iter().zip(&weights) {
        for (m, v) in mean.iter_mut().zip(x) {
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

    let deviations: Vec<Vec<f64>> = members
        .iter()
        .map(|x| x.iter().zip(&mean).map(|(a, b)| a - b).collect())
        .collect();
    let mut pb = DMatrix::zeros(n, n);
    for (d, &w) in deviations.iter().zip(&weights) {
        for j in 0..n {
            for i in 0..n {
                pb[(i, j)] += w * d[i] * d[j];
            }
        }
    }
    for i in 0..n {
        pb[(i, i)] += q;
    }

    let mut diagnostics = CycleDiagnostics {
        chol_jitter: jitter,
        ..Default::default()
    };
    let (xa, pa) = match y_o {
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
            let gain = solve_gain(&pxy, pyy)?;
            let innov = innovation(y, &y_mean);
            diagnostics.innovation_norm = innov.norm();
            let xa = DVector::from_vec(mean) + &gain * innov;
            let correction = &gain * pxy.transpose();
            let sym = (&correction + correction.transpose()) * 0.5;
            (xa.as_slice().to_vec(), pb - sym)
        }
    };
    diagnostics.evaluations = model.counter().get() - start;
    if !xa.iter().all(|v| v.is_finite()) || !pa.iter().all(|v| v.is_finite()) {
        return Err(FilterError::NonFinite);
    }
    Ok(FilterState { xa, pa, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::LinearModel;

    #[test]
    fn sigma_offsets_for_identity() {
        // P = I, n = 2, κ = 0: offsets are ±√2 eᵢ
        let (l, jitter) = cholesky_with_jitter(&(DMatrix::<f64>::identity(2, 2) * 2.0)).unwrap();
        assert_eq!(jitter, 0.0);
        let s2 = 2f64.sqrt();
        assert!((l - DMatrix::identity(2, 2) * s2).abs().max() < 1e-15);
    }

    #[test]
    fn identity_forecast_preserves_moments() {
        let model = LinearModel::from_matrix(DMatrix::identity(2, 2)).unwrap();
        let obs = ObservationOperator::new(2, vec![0], 1.0).unwrap();
        let state = FilterState::new(vec![1.0, -2.0], DMatrix::identity(2, 2) * 0.3);
        let out = dense_ukf_cycle(&state, None, &model, &obs, 0.0, 0.0).unwrap();
        assert!((out.xa[0] - 1.0).abs() < 1e-15 && (out.xa[1] + 2.0).abs() < 1e-15);
        assert!((out.pa.clone() - DMatrix::identity(2, 2) * 0.3).abs().max() < 1e-15);
        assert_eq!(out.diagnostics.evaluations, 2 * 5);
    }
}
