use nalgebra::DMatrix;

use super::ModelError;

/// Linear selection of state entries with observation noise covariance
/// `R = noise_var · I`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationOperator {
    n: usize,
    indices: Vec<usize>,
    noise_var: f64,
}

impl ObservationOperator {
    pub fn new(n: usize, indices: Vec<usize>, noise_var: f64) -> Result<Self, ModelError> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(ModelError::IndexOutOfRange { index: bad, dim: n });
        }
        if indices.is_empty() {
            return Err(ModelError::InvalidParameter("no observed indices".into()));
        }
        if !(noise_var >= 0.0) || !noise_var.is_finite() {
            return Err(ModelError::InvalidParameter(format!("noise variance {noise_var}")));
        }
        Ok(Self { n, indices, noise_var })
    }

    /// Observes entries `0, stride, 2·stride, ..` (1-based: 1, 1+stride, ..).
    pub fn strided(n: usize, stride: usize, noise_var: f64) -> Result<Self, ModelError> {
        if stride == 0 {
            return Err(ModelError::InvalidParameter("stride must be positive".into()));
        }
        Self::new(n, (0..n).step_by(stride).collect(), noise_var)
    }

    /// Every other state variable.
    pub fn every_other(n: usize, noise_var: f64) -> Result<Self, ModelError> {
        Self::strided(n, 2, noise_var)
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn obs_dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn observe(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.n {
            return Err(ModelError::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(self.indices.iter().map(|&i| x[i]).collect())
    }

    /// The constant selection matrix `H` (m × n).
    pub fn jacobian(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.indices.len(), self.n);
        for (r, &i) in self.indices.iter().enumerate() {
            h[(r, i)] = 1.0;
        }
        h
    }

    /// `R` as a dense matrix.
    pub fn noise_cov(&self) -> DMatrix<f64> {
        DMatrix::identity(self.obs_dim(), self.obs_dim()) * self.noise_var
    }
}
