use std::sync::Arc;

use nalgebra::DMatrix;

use super::{SparseError, SparseSymMatrix, SparseVector, SparsityPattern};

/// Takes `x` where it is defined and `y` everywhere else.
pub fn merge(x: &SparseVector, y: &[f64]) -> Result<Vec<f64>, SparseError> {
    if x.dim() != y.len() {
        return Err(SparseError::DimensionMismatch {
            expected: x.dim(),
            found: y.len(),
        });
    }
    let mut z = y.to_vec();
    for (i, v) in x.iter() {
        z[i] = v;
    }
    Ok(z)
}

/// `Σ_k w_k c_k c_kᵀ` evaluated only at the admissible entries of `pattern`.
pub fn restricted_outer_accumulate<C: AsRef<[f64]>>(
    columns: &[C],
    weights: &[f64],
    pattern: &Arc<SparsityPattern>,
) -> Result<SparseSymMatrix, SparseError> {
    if columns.len() != weights.len() {
        return Err(SparseError::DimensionMismatch {
            expected: columns.len(),
            found: weights.len(),
        });
    }
    let n = pattern.dim();
    if let Some(c) = columns.iter().find(|c| c.as_ref().len() != n) {
        return Err(SparseError::DimensionMismatch {
            expected: n,
            found: c.as_ref().len(),
        });
    }
    let mut out = SparseSymMatrix::zeros(pattern.clone());
    let slots: Vec<(usize, usize, usize)> = out.entries().collect();
    let values = out.values_mut();
    for (c, &w) in columns.iter().zip(weights) {
        let c = c.as_ref();
        for &(slot, i, j) in &slots {
            values[slot] += w * c[i] * c[j];
        }
    }
    Ok(out)
}

/// `A·B` evaluated only at admissible entries and symmetrized there:
/// `½(row_i(A)·col_j(B) + row_j(A)·col_i(B))`.
pub fn restricted_product(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    pattern: &Arc<SparsityPattern>,
) -> Result<SparseSymMatrix, SparseError> {
    let n = pattern.dim();
    if a.nrows() != n {
        return Err(SparseError::DimensionMismatch {
            expected: n,
            found: a.nrows(),
        });
    }
    if b.ncols() != n {
        return Err(SparseError::DimensionMismatch {
            expected: n,
            found: b.ncols(),
        });
    }
    if a.ncols() != b.nrows() {
        return Err(SparseError::DimensionMismatch {
            expected: a.ncols(),
            found: b.nrows(),
        });
    }
    let inner = a.ncols();
    let dot = |i: usize, j: usize| (0..inner).map(|k| a[(i, k)] * b[(k, j)]).sum::<f64>();
    let mut out = SparseSymMatrix::zeros(pattern.clone());
    let slots: Vec<(usize, usize, usize)> = out.entries().collect();
    let values = out.values_mut();
    for (slot, i, j) in slots {
        values[slot] = if i == j {
            dot(i, i)
        } else {
            0.5 * (dot(i, j) + dot(j, i))
        };
    }
    Ok(out)
}
