use super::{SparseColumns, SparseError, SparseSymMatrix};

/// First jitter, relative to the largest diagonal entry of `scale·P`.
pub const JITTER_START: f64 = 1e-10;
/// Retries before giving up. The last jitter, `2³²·1e-10 ≈ 0.43` of the
/// largest diagonal entry, stays below the diagonal scale so genuinely
/// indefinite input is still reported.
pub const JITTER_RETRIES: usize = 33;

/// Zero-fill incomplete Cholesky factor and the diagonal jitter that was
/// needed to obtain it (zero when the first attempt succeeded).
#[derive(Clone, Debug)]
pub struct IncompleteCholesky {
    pub factor: SparseColumns,
    pub jitter: f64,
}

/// Incomplete Cholesky factor `L` of `scale·P` in natural index order.
///
/// The recurrence runs only at admissible entries with row ≥ column; any
/// fill-in outside the pattern (the cyclic wrap corner for band patterns) is
/// dropped. When a pivot is not positive the factorization restarts on
/// `scale·P + εI`, `ε` doubling from `1e-10·max diag(scale·P)`.
///
/// Zero-fill factorization can break down on matrices that are positive
/// definite but close to singular, which is exactly what the positivity
/// shift of the filters produces.
pub fn incomplete_cholesky(p: &SparseSymMatrix, scale: f64) -> Result<IncompleteCholesky, SparseError> {
    let diag_max = p
        .diagonal()
        .iter()
        .map(|d| (scale * d).abs())
        .fold(0.0, f64::max);
    let start = JITTER_START * if diag_max > 0.0 && diag_max.is_finite() { diag_max } else { 1.0 };
    let mut jitter = 0.0;
    let mut last_err = None;
    for attempt in 0..=JITTER_RETRIES {
        if attempt == 1 {
            jitter = start;
        } else if attempt > 1 {
            jitter *= 2.0;
        }
        match factorize(p, scale, jitter) {
            Ok(factor) => return Ok(IncompleteCholesky { factor, jitter }),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn factorize(p: &SparseSymMatrix, scale: f64, jitter: f64) -> Result<SparseColumns, SparseError> {
    let pattern = p.pattern().clone();
    let n = pattern.dim();
    let mut l = SparseColumns::zeros(pattern.clone());
    let mut earlier: Vec<usize> = Vec::with_capacity(pattern.nsp());
    for j in 0..n {
        earlier.clear();
        earlier.extend(pattern.column_rows(j).filter(|&k| k < j));
        earlier.sort_unstable();

        let mut pivot = scale * p.get(j, j) + jitter;
        for &k in &earlier {
            let v = l.get(j, k);
            pivot -= v * v;
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(SparseError::NotPositiveDefinite { column: j, jitter });
        }
        let ljj = pivot.sqrt();
        l.set(j, j, ljj)?;

        for i in pattern.column_rows(j).filter(|&i| i > j) {
            let mut acc = scale * p.get(i, j);
            for &k in &earlier {
                acc -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, acc / ljj)?;
        }
    }
    Ok(l)
}

/// Smallest eigenvalue of the symmetric matrix represented by `p`, with every
/// entry off the pattern taken as zero.
pub fn min_eigenvalue(p: &SparseSymMatrix) -> f64 {
    p.to_dense()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
