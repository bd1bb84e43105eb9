use std::sync::Arc;

use nalgebra::DMatrix;

use super::{SparseError, SparsityPattern};

/// Symmetric matrix stored only at the admissible entries of a pattern, one
/// slot per unordered pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let len = pattern.dim() * (pattern.half_bandwidth() + 1);
        Self {
            pattern,
            values: vec![0.0; len],
        }
    }

    pub fn scaled_identity(pattern: Arc<SparsityPattern>, scale: f64) -> Self {
        let mut m = Self::zeros(pattern);
        m.add_diagonal(scale);
        m
    }

    /// Restriction of a dense matrix to the pattern. The stored value is the
    /// mean of the `(i, j)` and `(j, i)` entries.
    pub fn from_dense(pattern: Arc<SparsityPattern>, dense: &DMatrix<f64>) -> Result<Self, SparseError> {
        let n = pattern.dim();
        if dense.nrows() != n || dense.ncols() != n {
            return Err(SparseError::DimensionMismatch {
                expected: n,
                found: dense.nrows().max(dense.ncols()),
            });
        }
        let mut m = Self::zeros(pattern);
        let slots: Vec<(usize, usize, usize)> = m.entries().collect();
        for (slot, i, j) in slots {
            m.values[slot] = 0.5 * (dense[(i, j)] + dense[(j, i)]);
        }
        Ok(m)
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    /// Number of stored scalars.
    pub fn storage_len(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let p = &*self.pattern;
        let n = p.dim();
        if i >= n || j >= n {
            return None;
        }
        let h = p.half_bandwidth();
        let d = p.forward(i, j);
        let e = (n - d) % n;
        let (owner, offset) = if d == 0 {
            (i, 0)
        } else if d < e || (d == e && i < j) {
            (i, d)
        } else {
            (j, e)
        };
        (offset <= h).then_some(owner * (h + 1) + offset)
    }

    /// Iterates `(slot, i, j)` over every stored pair, `i` being the owner
    /// column and `j = i + offset` cyclically.
    pub(crate) fn entries(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let n = self.pattern.dim();
        let h = self.pattern.half_bandwidth();
        (0..n).flat_map(move |i| {
            (0..=h).filter_map(move |off| {
                let j = (i + off) % n;
                let e = n - off;
                let canonical = off == 0 || off < e || (off == e && i < j);
                canonical.then_some((i * (h + 1) + off, i, j))
            })
        })
    }

    /// Value at `(i, j)`; exactly zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.values[s])
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<(), SparseError> {
        let s = self.slot(i, j).ok_or(SparseError::OutsidePattern { row: i, col: j })?;
        self.values[s] = value;
        Ok(())
    }

    pub fn add_diagonal(&mut self, shift: f64) {
        let h = self.pattern.half_bandwidth();
        for i in 0..self.dim() {
            self.values[i * (h + 1)] += shift;
        }
    }

    /// `self += alpha * other`; both must share a pattern.
    pub fn axpy(&mut self, alpha: f64, other: &SparseSymMatrix) -> Result<(), SparseError> {
        if *self.pattern != *other.pattern {
            return Err(SparseError::PatternMismatch);
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    /// Column `j` as a dense vector.
    pub fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.dim()];
        for i in self.pattern.column_rows(j) {
            col[i] = self.get(i, j);
        }
        col
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut d = DMatrix::zeros(n, n);
        for (slot, i, j) in self.entries() {
            d[(i, j)] = self.values[slot];
            d[(j, i)] = self.values[slot];
        }
        d
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// `n` sparse columns sharing a pattern; column `j` is nonzero only at the
/// admissible rows of pattern column `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseColumns {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl SparseColumns {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let len = pattern.dim() * (2 * pattern.half_bandwidth() + 1);
        Self {
            pattern,
            values: vec![0.0; len],
        }
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let p = &*self.pattern;
        let n = p.dim();
        if i >= n || j >= n {
            return None;
        }
        let h = p.half_bandwidth();
        let d = p.forward(j, i);
        let local = if d <= h {
            d
        } else if n - d <= h {
            h + (n - d)
        } else {
            return None;
        };
        Some(j * (2 * h + 1) + local)
    }

    /// Entry at row `i` of column `j`; zero outside the pattern.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.values[s])
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<(), SparseError> {
        let s = self.slot(i, j).ok_or(SparseError::OutsidePattern { row: i, col: j })?;
        self.values[s] = value;
        Ok(())
    }

    /// Nonzero support of column `j` as `(row, value)` pairs.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pattern.column_rows(j).map(move |i| (i, self.get(i, j)))
    }

    pub fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.dim()];
        for (i, v) in self.column(j) {
            col[i] = v;
        }
        col
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut d = DMatrix::zeros(n, n);
        for j in 0..n {
            for (i, v) in self.column(j) {
                d[(i, j)] = v;
            }
        }
        d
    }
}

/// Vector with an explicit index set; reads outside the set return zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    n: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a vector from `(index, value)` pairs. Indices are sorted; a
    /// repeated index is an error.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self, SparseError> {
        let mut pairs: Vec<(usize, f64)> = entries.into_iter().collect();
        pairs.sort_by_key(|&(i, _)| i);
        if let Some(&(i, _)) = pairs.iter().find(|&&(i, _)| i >= n) {
            return Err(SparseError::IndexOutOfRange { index: i, dim: n });
        }
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(SparseError::DuplicateIndex(w[0].0));
        }
        let (indices, values) = pairs.into_iter().unzip();
        Ok(Self { n, indices, values })
    }

    /// Takes the entries of `dense` at `indices`.
    pub fn gather(dense: &[f64], indices: &[usize]) -> Result<Self, SparseError> {
        Self::new(
            dense.len(),
            indices.iter().map(|&i| (i, dense.get(i).copied().unwrap_or(f64::NAN))),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, i: usize) -> f64 {
        self.indices
            .binary_search(&i)
            .map_or(0.0, |k| self.values[k])
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (i, v) in self.iter() {
            d[i] = v;
        }
        d
    }
}
