use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_obs, innovation, solve_gain, CycleDiagnostics, FilterError};
use crate::models::{ComponentModel, ObservationOperator};

/// Stochastic EnKF settings.
#[derive(Clone, Debug)]
pub struct EnkfParams {
    pub n_ens: usize,
    /// Localization radius in grid points; the taper vanishes at twice this.
    pub radius: f64,
    /// Multiplicative factor on forecast deviations from the ensemble mean.
    pub inflation: f64,
}

impl Default for EnkfParams {
    fn default() -> Self {
        Self {
            n_ens: 10,
            radius: 4.0,
            inflation: 1.08f64.sqrt(),
        }
    }
}

/// Gaspari–Cohn fifth-order compactly supported correlation with half-width
/// `radius`: 1 at distance 0, 0 from `2·radius` on.
pub fn gaspari_cohn(distance: f64, radius: f64) -> f64 {
    let z = distance.abs() / radius;
    if z <= 1.0 {
        1.0 + z * z * (-5.0 / 3.0 + z * (5.0 / 8.0 + z * (0.5 - 0.25 * z)))
    } else if z < 2.0 {
        4.0 - 5.0 * z + z * z * (5.0 / 3.0 + z * (5.0 / 8.0 + z * (-0.5 + z / 12.0))) - 2.0 / (3.0 * z)
    } else {
        0.0
    }
}

fn cyclic(i: usize, j: usize, n: usize) -> f64 {
    let d = i.abs_diff(j);
    d.min(n - d) as f64
}

pub fn ensemble_mean(members: &[Vec<f64>]) -> Vec<f64> {
    let n = members.first().map_or(0, Vec::len);
    let inv = 1.0 / members.len() as f64;
    (0..n).map(|i| members.iter().map(|x| x[i]).sum::<f64>() * inv).collect()
}

/// One cycle of the perturbed-observation EnKF with multiplicative inflation
/// of the forecast deviations and Gaspari–Cohn localization on cyclic
/// distance. Returns the analysis ensemble.
pub fn enkf_cycle<M: ComponentModel + ?Sized, R: Rng + ?Sized>(
    ensemble: &[Vec<f64>],
    y_o: Option<&[f64]>,
    model: &M,
    obs: &ObservationOperator,
    params: &EnkfParams,
    rng: &mut R,
) -> Result<(Vec<Vec<f64>>, CycleDiagnostics), FilterError> {
    let n = model.dim();
    let k = ensemble.len();
    if k < 2 || k != params.n_ens {
        return Err(FilterError::InvalidParameter(format!(
            "ensemble has {k} members, expected n_ens = {} >= 2",
            params.n_ens
        )));
    }
    if !(params.radius > 0.0) || !(params.inflation > 0.0) {
        return Err(FilterError::InvalidParameter(format!(
            "radius = {}, inflation = {}",
            params.radius, params.inflation
        )));
    }
    check_obs(obs, n, y_o)?;
    let start = model.counter().get();

    let mut members: Vec<Vec<f64>> = ensemble.iter().map(|x| model.step(x)).collect::<Result<_, _>>()?;
    let mean = ensemble_mean(&members);
    for x in &mut members {
        for (v, m) in x.iter_mut().zip(&mean) {
            *v = m + params.inflation * (*v - m);
        }
    }

    let mut diagnostics = CycleDiagnostics::default();
    if let Some(y) = y_o {
        let idx = obs.indices();
        let m = idx.len();
        let dev: Vec<Vec<f64>> = members
            .iter()
            .map(|x| x.iter().zip(&mean).map(|(a, b)| a - b).collect())
            .collect();
        let norm = 1.0 / (k as f64 - 1.0);
        let sample = |r: usize, c: usize| dev.iter().map(|d| d[r] * d[c]).sum::<f64>() * norm;
        let pht = DMatrix::from_fn(n, m, |r, c| gaspari_cohn(cyclic(r, idx[c], n), params.radius) * sample(r, idx[c]));
        let s = DMatrix::from_fn(m, m, |a, b| {
            gaspari_cohn(cyclic(idx[a], idx[b], n), params.radius) * sample(idx[a], idx[b])
        }) + obs.noise_cov();
        let gain = solve_gain(&pht, s)?;

        diagnostics.innovation_norm = innovation(y, &obs.observe(&mean)?).norm();
        let sd = obs.noise_var().sqrt();
        for x in &mut members {
            let hx = obs.observe(x)?;
            let d = DVector::from_iterator(
                m,
                y.iter().zip(&hx).map(|(yo, h)| {
                    let e: f64 = rng.sample(StandardNormal);
                    yo + sd * e - h
                }),
            );
            let inc = &gain * d;
            for (v, dv) in x.iter_mut().zip(inc.iter()) {
                *v += dv;
            }
        }
    }
    diagnostics.evaluations = model.counter().get() - start;
    if !members.iter().all(|x| x.iter().all(|v| v.is_finite())) {
        return Err(FilterError::NonFinite);
    }
    Ok((members, diagnostics))
}
