//! Dense real linear algebra: matrix and vector types, SVD with a full
//! orthogonal `U`, orthogonal-matrix constructions, norms, and a dense
//! normal-equations oracle solver.
//!
//! Everything is `f64`, row-major, and sized for the dense regime (hundreds of
//! rows), which is all the rest of the crate needs.

mod oracle;
mod svd;

pub use oracle::solve_normal_equations_oracle;
pub use svd::{svd, SvdFactorization};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default relative threshold for [`numerical_rank`]: singular values at or
/// below `1e-14 * sigma_1` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-14;

/// Dense column vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Wraps `data`, rejecting NaN and infinities.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry { row: i, col: 0 });
        }
        Ok(Self { data })
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: vec![0.0; n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> f64) -> Self {
        Self {
            data: (0..n).map(&mut f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector {
            data: self.data.iter().map(|x| s * x).collect(),
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "add: length mismatch");
        Vector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "sub: length mismatch");
        Vector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Dense row-major matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Wraps row-major `data`, rejecting wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidDimensions {
                op: "DenseMatrix::new",
                details: format!(
                    "{rows}x{cols} needs {} entries, got {}",
                    rows * cols,
                    data.len()
                ),
            });
        }
        if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteEntry {
                row: idx / cols.max(1),
                col: idx % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Fills entries in row-major order, so `f`'s side effects (an RNG, say)
    /// are hit in a deterministic order.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vector {
        Vector::from_fn(self.rows, |i| self.get(i, j))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn matvec(&self, x: &Vector) -> Vector {
        assert_eq!(self.cols, x.len(), "matvec: dimension mismatch");
        let mut y = vec![0.0; self.rows];
        for (i, yi) in y.iter_mut().enumerate() {
            let row = self.row(i);
            *yi = row.iter().zip(&x.data).map(|(a, b)| a * b).sum();
        }
        Vector { data: y }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul: dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        // i-k-j order keeps the inner loop streaming over contiguous rows.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a_ik = self.get(i, k);
                if a_ik == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for j in 0..other.cols {
                    out_row[j] += a_ik * orow[j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Returns `self * diag(w)`.
    pub fn scale_columns(&self, w: &[f64]) -> DenseMatrix {
        assert_eq!(self.cols, w.len(), "scale_columns: dimension mismatch");
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * w[j])
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "add: dimension mismatch");
        assert_eq!(self.cols, other.cols, "add: dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "sub: dimension mismatch");
        assert_eq!(self.cols, other.cols, "sub: dimension mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Full Householder QR: returns `(Q, R)` with `Q` square `m x m` orthogonal
/// and `R` upper triangular `m x n`, `A = Q R`. No pivoting; rank-deficient
/// columns simply produce zero diagonal entries in `R`.
pub fn householder_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(m);
    for k in 0..n.min(m) {
        let mut nx2 = 0.0;
        for i in k..m {
            let x = r.get(i, k);
            nx2 += x * x;
        }
        if nx2 == 0.0 {
            continue;
        }
        let x0 = r.get(k, k);
        let alpha = if x0 >= 0.0 { -nx2.sqrt() } else { nx2.sqrt() };
        let v0 = x0 - alpha;
        let vnorm2 = nx2 - x0 * x0 + v0 * v0;
        if vnorm2 == 0.0 {
            continue;
        }
        let mut v = Vec::with_capacity(m - k);
        v.push(v0);
        for i in k + 1..m {
            v.push(r.get(i, k));
        }
        let beta = 2.0 / vnorm2;
        // R[k.., k..] -= beta v (v^T R[k.., k..])
        for j in k..n {
            let mut s = 0.0;
            for (t, vi) in v.iter().enumerate() {
                s += vi * r.get(k + t, j);
            }
            let sb = beta * s;
            for (t, vi) in v.iter().enumerate() {
                let cur = r.get(k + t, j);
                r.set(k + t, j, cur - sb * vi);
            }
        }
        // Q[.., k..] -= beta (Q[.., k..] v) v^T
        for i in 0..m {
            let mut s = 0.0;
            for (t, vi) in v.iter().enumerate() {
                s += vi * q.get(i, k + t);
            }
            let sb = beta * s;
            for (t, vi) in v.iter().enumerate() {
                let cur = q.get(i, k + t);
                q.set(i, k + t, cur - sb * vi);
            }
        }
        // The reflection annihilates these entries exactly in exact
        // arithmetic; drop the rounding residue so R is cleanly triangular.
        r.set(k, k, alpha);
        for i in k + 1..m {
            r.set(i, k, 0.0);
        }
    }
    (q, r)
}

/// Haar-ish random orthogonal matrix: QR of a standard Gaussian matrix with
/// the sign convention `diag(R) >= 0`, which makes the draw a deterministic
/// function of the RNG stream.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let g = DenseMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let (mut q, r) = householder_qr(&g);
    for j in 0..n {
        if r.get(j, j) < 0.0 {
            for i in 0..n {
                let cur = q.get(i, j);
                q.set(i, j, -cur);
            }
        }
    }
    q
}

/// Orthonormal DCT-II matrix: row `j` samples `cos(pi (2t+1) j / (2n))`
/// scaled so the matrix is orthogonal.
pub fn dct_matrix(n: usize) -> DenseMatrix {
    assert!(n >= 1, "dct_matrix: n must be at least 1");
    let nf = n as f64;
    DenseMatrix::from_fn(n, n, |j, t| {
        let w = if j == 0 {
            (1.0 / nf).sqrt()
        } else {
            (2.0 / nf).sqrt()
        };
        w * (std::f64::consts::PI * (2 * t + 1) as f64 * j as f64 / (2.0 * nf)).cos()
    })
}

/// Number of singular values exceeding `tol * sigma[0]`. Expects `sigma`
/// nonincreasing and nonnegative; see [`DEFAULT_RANK_TOL`].
pub fn numerical_rank(sigma: &[f64], tol: f64) -> usize {
    debug_assert!(sigma.windows(2).all(|w| w[0] >= w[1]), "sigma not sorted");
    let Some(&s1) = sigma.first() else { return 0 };
    sigma.iter().filter(|&&s| s > tol * s1).count()
}

/// Extends the orthonormal columns of `u_thin` (`m x n`, `m >= n`) to a full
/// orthonormal basis of `R^m`. The first `n` columns of the result are
/// `u_thin` unchanged; the added columns are built deterministically from
/// identity-vector candidates (largest residual first, ties to the lowest
/// index) with the largest-magnitude entry of each made positive.
pub(crate) fn complete_orthonormal_basis(u_thin: &DenseMatrix) -> DenseMatrix {
    let (m, n) = (u_thin.rows(), u_thin.cols());
    assert!(m >= n, "complete_orthonormal_basis: more columns than rows");
    if m == n {
        return u_thin.clone();
    }
    let thin_cols: Vec<Vector> = (0..n).map(|j| u_thin.col(j)).collect();

    // Residuals of each identity vector after projecting off u_thin's columns.
    let mut cand: Vec<(usize, Vec<f64>)> = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            (i, e)
        })
        .collect();
    for (_, c) in cand.iter_mut() {
        for _ in 0..2 {
            for u in &thin_cols {
                let s: f64 = u.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
                for (ci, ui) in c.iter_mut().zip(u.iter()) {
                    *ci -= s * ui;
                }
            }
        }
    }

    let mut extras: Vec<Vec<f64>> = Vec::with_capacity(m - n);
    while extras.len() < m - n {
        let mut best = 0;
        let mut best_n2 = -1.0;
        for (pos, (_, c)) in cand.iter().enumerate() {
            let n2: f64 = c.iter().map(|x| x * x).sum();
            if n2 > best_n2 {
                best_n2 = n2;
                best = pos;
            }
        }
        debug_assert!(best_n2 > 1e-12, "candidate residuals vanished");
        let (_, mut v) = cand.remove(best);
        // One more orthogonalization pass against everything for hygiene.
        for u in thin_cols
            .iter()
            .map(|u| u.as_slice())
            .chain(extras.iter().map(|e| e.as_slice()))
        {
            let s: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            for (vi, ui) in v.iter_mut().zip(u.iter()) {
                *vi -= s * ui;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        // Sign convention: largest-magnitude entry positive, ties to the
        // lowest index.
        let mut imax = 0;
        for (i, &x) in v.iter().enumerate() {
            if x.abs() > v[imax].abs() {
                imax = i;
            }
        }
        if v[imax] < 0.0 {
            for vi in v.iter_mut() {
                *vi = -*vi;
            }
        }
        for (_, c) in cand.iter_mut() {
            let s: f64 = v.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
            for (ci, vi) in c.iter_mut().zip(v.iter()) {
                *ci -= s * vi;
            }
        }
        extras.push(v);
    }

    DenseMatrix::from_fn(m, m, |i, j| {
        if j < n {
            u_thin.get(i, j)
        } else {
            extras[j - n][i]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> DenseMatrix {
        DenseMatrix::new(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0; 3]),
            Err(Error::InvalidDimensions { .. })
        ));
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFiniteEntry { row: 0, col: 1 })
        ));
        assert!(matches!(
            Vector::new(vec![0.0, f64::INFINITY]),
            Err(Error::NonFiniteEntry { row: 1, col: 0 })
        ));
    }

    #[test]
    fn matmul_matvec_transpose_agree_with_hand_results() {
        let a = mat(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = mat(3, 2, &[7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = a.matmul(&b);
        assert_eq!(c.data(), &[58.0, 64.0, 139.0, 154.0]);
        let x = Vector::new(vec![1.0, -1.0, 2.0]).unwrap();
        let y = a.matvec(&x);
        assert_eq!(y.as_slice(), &[5.0, 11.0]);
        let at = a.transpose();
        assert_eq!(at.rows(), 3);
        assert_eq!(at.get(2, 1), 6.0);
        assert_eq!(at.transpose(), a);
    }

    #[test]
    fn norms_match_hand_results() {
        let a = mat(2, 2, &[3.0, 0.0, 0.0, 4.0]);
        assert_eq!(a.frobenius_norm(), 5.0);
        let v = Vector::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(v.norm(), 5.0);
        assert_eq!(v.dot(&v), 25.0);
    }

    #[test]
    fn householder_qr_factors_and_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(m, n) in &[(5usize, 5usize), (8, 5), (6, 1), (7, 6)] {
            let a = DenseMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal));
            let (q, r) = householder_qr(&a);
            let qtq = q.transpose().matmul(&q);
            let orth = qtq.sub(&DenseMatrix::identity(m)).frobenius_norm();
            assert!(orth <= 1e-12 * m as f64, "orthogonality residual {orth}");
            let recon = q.matmul(&r).sub(&a).frobenius_norm();
            assert!(recon <= 1e-12 * a.frobenius_norm().max(1.0));
            for j in 0..n {
                for i in j + 1..m {
                    assert_eq!(r.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn random_orthogonal_is_orthogonal_and_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let q = random_orthogonal(30, &mut rng);
        let res = q
            .transpose()
            .matmul(&q)
            .sub(&DenseMatrix::identity(30))
            .frobenius_norm();
        assert!(res <= 1e-12 * 30.0, "orthogonality residual {res}");
        let mut rng2 = ChaCha8Rng::seed_from_u64(42);
        let q2 = random_orthogonal(30, &mut rng2);
        assert_eq!(q.data(), q2.data());
        let q3 = random_orthogonal(30, &mut rng);
        assert_ne!(q.data(), q3.data());
    }

    #[test]
    fn dct_matrix_matches_small_cases_and_is_orthogonal() {
        let c1 = dct_matrix(1);
        assert_eq!(c1.data(), &[1.0]);
        let c2 = dct_matrix(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (got, want) in c2.data().iter().zip([s, s, s, -s]) {
            assert!((got - want).abs() <= 1e-15);
        }
        let n = 16;
        let c = dct_matrix(n);
        let res = c
            .transpose()
            .matmul(&c)
            .sub(&DenseMatrix::identity(n))
            .frobenius_norm();
        assert!(res <= 1e-12 * n as f64);
    }

    #[test]
    fn numerical_rank_counts_relative_to_largest() {
        assert_eq!(numerical_rank(&[5.0, 3.0, 0.0, 0.0], DEFAULT_RANK_TOL), 2);
        assert_eq!(numerical_rank(&[], DEFAULT_RANK_TOL), 0);
        assert_eq!(numerical_rank(&[0.0, 0.0], DEFAULT_RANK_TOL), 0);
        // Scale invariance: tiny but well-separated values keep full rank.
        assert_eq!(numerical_rank(&[5e-20, 3e-20], DEFAULT_RANK_TOL), 2);
        // A value right at the threshold does not count (strict inequality).
        assert_eq!(numerical_rank(&[1.0, 1e-14], DEFAULT_RANK_TOL), 1);
    }

    #[test]
    fn completion_extends_thin_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DenseMatrix::from_fn(9, 4, |_, _| rng.sample(StandardNormal));
        let f = svd(&a).unwrap();
        let res =
            f.u.transpose()
                .matmul(&f.u)
                .sub(&DenseMatrix::identity(9))
                .frobenius_norm();
        assert!(res <= 1e-12 * 9.0, "full U orthogonality residual {res}");
    }
}
