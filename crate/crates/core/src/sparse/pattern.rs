use std::fmt;

/// Cyclic band pattern over an `n`-dimensional state: entry `(i, j)` is
/// admissible iff the cyclic distance between `i` and `j` is at most the
/// half bandwidth.
///
/// A half bandwidth of `n / 2` or more admits every entry; it is clamped to
/// `n / 2` on construction so that every admissible pair has one canonical
/// storage slot.
#[derive(Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    half_bandwidth: usize,
}

impl SparsityPattern {
    pub fn new(n: usize, half_bandwidth: usize) -> Result<Self, super::SparseError> {
        if n == 0 {
            return Err(super::SparseError::EmptyDimension);
        }
        Ok(Self {
            n,
            half_bandwidth: half_bandwidth.min(n / 2),
        })
    }

    /// Pattern with `nsp` admissible entries per column. `nsp` must be odd.
    pub fn with_nsp(n: usize, nsp: usize) -> Result<Self, super::SparseError> {
        if nsp % 2 == 0 || nsp > n {
            return Err(super::SparseError::InvalidNsp { n, nsp });
        }
        Self::new(n, nsp / 2)
    }

    /// Every entry admissible.
    pub fn full(n: usize) -> Result<Self, super::SparseError> {
        Self::new(n, n / 2)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    /// Admissible entries per column.
    pub fn nsp(&self) -> usize {
        (2 * self.half_bandwidth + 1).min(self.n)
    }

    pub fn is_full(&self) -> bool {
        self.nsp() == self.n
    }

    pub fn cyclic_distance(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        d.min(self.n - d)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.cyclic_distance(i, j) <= self.half_bandwidth
    }

    /// Forward offset `(j - i) mod n`.
    #[inline]
    pub(crate) fn forward(&self, i: usize, j: usize) -> usize {
        (j + self.n - i) % self.n
    }

    /// Rows admissible in column `j`, in increasing cyclic offset order
    /// `j, j+1, .., j+h, j-1, .., j-h` (each row once).
    pub fn column_rows(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        let h = self.half_bandwidth;
        let forward = (0..=h).map(move |d| (j + d) % n);
        let backward = (1..=h)
            .filter(move |&b| n - b > h)
            .map(move |b| (j + n - b) % n);
        forward.chain(backward)
    }

    /// Sorted admissible rows of column `j`.
    pub fn column(&self, j: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self.column_rows(j).collect();
        rows.sort_unstable();
        rows
    }
}

impl fmt::Debug for SparsityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SparsityPattern(n={}, h={}, nsp={})",
            self.n,
            self.half_bandwidth,
            self.nsp()
        )
    }
}
