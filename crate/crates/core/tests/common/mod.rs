#![allow(dead_code)]

//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's linear algebra.

pub type Dense = Vec<Vec<f64>>;

pub fn zeros(n: usize, m: usize) -> Dense {
    vec![vec![0.0; m]; n]
}

pub fn identity(n: usize) -> Dense {
    let mut a = zeros(n, n);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    a
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut c = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            for j in 0..m {
                c[i][j] += ail * b[l][j];
            }
        }
    }
    c
}

pub fn transpose(a: &Dense) -> Dense {
    let (n, m) = (a.len(), a[0].len());
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Textbook Cholesky–Banachiewicz; `None` if a pivot is not positive.
pub fn cholesky(a: &Dense) -> Option<Dense> {
    let n = a.len();
    let mut l = zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut m: Dense = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        for v in &mut m[c] {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Dense Kalman filter step for `x ← M x`, `y = H x + v`.
pub struct DenseKf {
    pub x: Vec<f64>,
    pub p: Dense,
}

impl DenseKf {
    pub fn forecast(&mut self, m: &Dense, q: f64) {
        self.x = matvec(m, &self.x);
        self.p = matmul(&matmul(m, &self.p), &transpose(m));
        for i in 0..self.x.len() {
            self.p[i][i] += q;
        }
    }

    pub fn update(&mut self, h: &Dense, r: f64, y: &[f64]) {
        let ht = transpose(h);
        let pht = matmul(&self.p, &ht);
        let mut s = matmul(h, &pht);
        for (i, row) in s.iter_mut().enumerate() {
            row[i] += r;
        }
        let k = matmul(&pht, &inverse(&s));
        let hx = matvec(h, &self.x);
        let innov: Vec<f64> = y.iter().zip(&hx).map(|(a, b)| a - b).collect();
        let dx = matvec(&k, &innov);
        for (x, d) in self.x.iter_mut().zip(dx) {
            *x += d;
        }
        let kh = matmul(&k, h);
        let n = self.x.len();
        let ikh: Dense = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - kh[i][j]).collect())
            .collect();
        self.p = matmul(&ikh, &self.p);
    }
}

/// One RK4 step of Lorenz-96, written out per stage.
pub fn l96_rk4(x: &[f64], dt: f64, f: f64) -> Vec<f64> {
    let n = x.len();
    let rhs = |y: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (y[(i + 1) % n] - y[(i + n - 2) % n]) * y[(i + n - 1) % n] - y[i] + f)
            .collect()
    };
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + s * q).collect() };
    let k1 = rhs(x);
    let k2 = rhs(&add(x, &k1, dt / 2.0));
    let k3 = rhs(&add(x, &k2, dt / 2.0));
    let k4 = rhs(&add(x, &k3, dt));
    (0..n)
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}
