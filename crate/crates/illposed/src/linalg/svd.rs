//! SVD wrapper: factors `A = U diag(sigma) V^T` with a full square `U`,
//! singular values sorted nonincreasing, and a deterministic sign convention.

use nalgebra as na;

use super::{complete_orthonormal_basis, DenseMatrix, Vector};
use crate::error::{Error, Result};

/// Full singular value decomposition of an `m x n` matrix, `m >= n`.
///
/// `u` is `m x m` orthogonal (the trailing `m - n` columns complete the range
/// basis), `sigma` holds the `n` singular values in nonincreasing order, and
/// `v` is `n x n` orthogonal, so `A = U [diag(sigma); 0] V^T`.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub u: DenseMatrix,
    pub sigma: Vector,
    pub v: DenseMatrix,
}

impl SvdFactorization {
    /// Reassembles `U diag(sigma) V^T`; test and diagnostic helper.
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut scaled = DenseMatrix::zeros(m, n);
        for j in 0..n {
            let s = self.sigma[j];
            for i in 0..m {
                scaled.set(i, j, self.u.get(i, j) * s);
            }
        }
        scaled.matmul(&self.v.transpose())
    }
}

// Iteration cap for the SVD kernel; generous for the dense sizes used here.
const SVD_MAX_ITER: usize = 10_000;

/// Computes the SVD of `a`, which must have `rows >= cols >= 1`; callers
/// transpose first when the matrix is wide and relabel the factors.
///
/// Determinism: singular values are sorted nonincreasing with a stable
/// permutation, and each `(u_j, v_j)` pair is flipped so the largest-magnitude
/// entry of `u_j` is positive (ties to the lowest row index), so equal inputs
/// produce bitwise-equal factors within one build.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactorization> {
    let (m, n) = (a.rows(), a.cols());
    if n == 0 || m < n {
        return Err(Error::InvalidDimensions {
            op: "svd",
            details: format!("requires rows >= cols >= 1, got {m}x{n}"),
        });
    }
    let mat = na::DMatrix::from_row_iterator(m, n, a.data().iter().copied());
    let f = na::SVD::try_new(mat, true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::SvdNonConvergence)?;
    let u_na = f.u.expect("u requested");
    let vt_na = f.v_t.expect("v_t requested");
    let sig_na = f.singular_values;

    // Stable descending sort; the kernel already orders values, this pins the
    // contract and canonicalizes ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sig_na[j].partial_cmp(&sig_na[i]).unwrap());

    let sigma = Vector::from_fn(n, |j| sig_na[order[j]]);
    let mut u_thin = DenseMatrix::from_fn(m, n, |i, j| u_na[(i, order[j])]);
    let mut v = DenseMatrix::from_fn(n, n, |i, j| vt_na[(order[j], i)]);

    for j in 0..n {
        let mut imax = 0;
        for i in 1..m {
            if u_thin.get(i, j).abs() > u_thin.get(imax, j).abs() {
                imax = i;
            }
        }
        if u_thin.get(imax, j) < 0.0 {
            for i in 0..m {
                let x = u_thin.get(i, j);
                u_thin.set(i, j, -x);
            }
            for i in 0..n {
                let x = v.get(i, j);
                v.set(i, j, -x);
            }
        }
    }

    let u = complete_orthonormal_basis(&u_thin);
    Ok(SvdFactorization { u, sigma, v })
}
