//! Dense normal-equations oracle: solves the regularized system directly,
//! without going through the spectral solve path it is used to cross-check.

use nalgebra as na;

use super::{DenseMatrix, Vector};
use crate::error::{Error, Result};

/// Solves `(A^T A + V diag(dsq) V^T) x = A^T b` by materializing the matrix
/// and factoring it with a dense Cholesky decomposition.
///
/// This is the reference route for the spectral filter solvers: any method
/// whose squared-spectrum modification is `dsq` in the right singular basis
/// `V` must produce the same `x`. Requires the regularized matrix to be
/// positive definite (all `sigma_j^2 + dsq_j > 0`); otherwise
/// [`Error::SingularRegularizedSystem`] is returned.
pub fn solve_normal_equations_oracle(
    a: &DenseMatrix,
    b: &Vector,
    v: &DenseMatrix,
    dsq: &[f64],
) -> Result<Vector> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m || v.rows() != n || v.cols() != n || dsq.len() != n {
        return Err(Error::InvalidDimensions {
            op: "solve_normal_equations_oracle",
            details: format!(
                "A is {m}x{n}, b has {}, V is {}x{}, dsq has {}",
                b.len(),
                v.rows(),
                v.cols(),
                dsq.len()
            ),
        });
    }
    let at = a.transpose();
    let vd = v.scale_columns(dsq);
    let mat = at.matmul(a).add(&vd.matmul(&v.transpose()));
    let rhs = at.matvec(b);

    let na_mat = na::DMatrix::from_row_iterator(n, n, mat.data().iter().copied());
    let chol = na::Cholesky::new(na_mat).ok_or(Error::SingularRegularizedSystem)?;
    let x = chol.solve(&na::DVector::from_column_slice(rhs.as_slice()));
    Vector::new(x.iter().copied().collect())
}
