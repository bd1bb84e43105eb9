use nalgebra::DMatrix;

use super::{ComponentModel, EvalCounter, ModelError};

/// Linear model `x ← x + (Δt/n_p)·A x` for a generator `A`. One full step is
/// `(I + Δt·A) x`; refined sub-steps shrink the increment.
#[derive(Debug)]
pub struct LinearModel {
    generator: DMatrix<f64>,
    dt: f64,
    counter: EvalCounter,
}

impl LinearModel {
    pub fn new(generator: DMatrix<f64>, dt: f64) -> Result<Self, ModelError> {
        if !generator.is_square() || generator.nrows() == 0 {
            return Err(ModelError::InvalidParameter(format!(
                "generator must be square and non-empty, got {}x{}",
                generator.nrows(),
                generator.ncols()
            )));
        }
        if !(dt > 0.0) {
            return Err(ModelError::InvalidParameter(format!("dt = {dt}")));
        }
        Ok(Self {
            generator,
            dt,
            counter: EvalCounter::default(),
        })
    }

    /// The one-step map `x ← M x`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self, ModelError> {
        let n = m.nrows();
        let identity = DMatrix::identity(n, m.ncols());
        Self::new(m - identity, 1.0)
    }

    /// The one-step transition matrix `I + Δt·A`.
    pub fn transition(&self) -> DMatrix<f64> {
        let n = self.generator.nrows();
        DMatrix::identity(n, n) + &self.generator * self.dt
    }

    fn row(&self, x: &[f64], i: usize, h: f64) -> f64 {
        let ax: f64 = (0..x.len()).map(|j| self.generator[(i, j)] * x[j]).sum();
        x[i] + h * ax
    }
}

impl ComponentModel for LinearModel {
    fn dim(&self) -> usize {
        self.generator.nrows()
    }

    fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    fn dependency_stencil(&self, i: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&j| j == i || self.generator[(i, j)] != 0.0)
            .collect()
    }

    fn advance(&self, x: &[f64], n_p: usize) -> Vec<f64> {
        let h = self.dt / n_p as f64;
        (0..x.len()).map(|i| self.row(x, i, h)).collect()
    }

    fn advance_components(&self, x: &[f64], out: &[usize], n_p: usize) -> Vec<f64> {
        let h = self.dt / n_p as f64;
        out.iter().map(|&i| self.row(x, i, h)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_map() {
        let m = LinearModel::from_matrix(DMatrix::from_element(1, 1, 0.9)).unwrap();
        let y = m.step(&[2.0]).unwrap();
        assert!((y[0] - 1.8).abs() < 1e-15);
        assert_eq!(m.counter().get(), 1);
    }

    #[test]
    fn components_match_full_step() {
        let a = DMatrix::from_fn(5, 5, |i, j| if i.abs_diff(j) <= 1 { (i + 2 * j) as f64 * 0.1 } else { 0.0 });
        let m = LinearModel::new(a, 0.05).unwrap();
        let x = [0.3, -1.0, 2.0, 0.5, 1.5];
        let full = m.step(&x).unwrap();
        let part = m.step_components(&x, &[1, 3]).unwrap();
        assert_eq!(part.get(1), full[1]);
        assert_eq!(part.get(3), full[3]);
        assert_eq!(m.dependency_stencil(0), vec![0, 1]);
    }
}
