//! Spectra of the Gram kernel `K = (1/p) X^T X`.
//!
//! Two solver paths produce a [`SpectrumResult`]:
//!
//! - dense: [`dense_symmetric_eigen`] on a materialized kernel, backed by
//!   cyclic Jacobi for small matrices and Householder tridiagonalization with
//!   implicit QL beyond [`JACOBI_MAX_DIM`];
//! - matrix-free: [`lanczos_topk`] on any [`SymmetricOperator`], with full
//!   reorthogonalization.
//!
//! Eigenvector signs coming out of either path are arbitrary. Consumers call
//! [`sign_align`] before comparing with a reference direction. When the top
//! eigenvalues are degenerate the solvers return *some* orthonormal basis of
//! the eigenspace; individual vectors are then meaningless.

mod gram;
mod jacobi;
mod lanczos;
mod tridiagonal;

pub use gram::{gram_apply, gram_matrix, DenseOperator, GramOperator, SymmetricOperator};
pub use jacobi::{jacobi_eigen, DEFAULT_MAX_SWEEPS};
pub use lanczos::{lanczos_topk, LanczosOptions};
pub use tridiagonal::{tridiagonal_ql_eigen, tridiagonal_ql_in_place};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, Matrix};

/// Largest dimension routed to the Jacobi solver by [`dense_symmetric_eigen`].
pub const JACOBI_MAX_DIM: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Dense,
    Lanczos,
}

/// Eigenpairs sorted by non-increasing eigenvalue.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    /// All `n` eigenvalues on the dense path, the `k` requested on the Lanczos path.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors as columns, aligned with the leading eigenvalues.
    pub eigenvectors: Matrix,
    /// `||K v - lambda v||` for each returned eigenvector.
    pub residual_norms: Vec<f64>,
    pub method: SolverMethod,
}

impl SpectrumResult {
    pub fn eigenvector(&self, j: usize) -> &[f64] {
        self.eigenvectors.col(j)
    }

    pub fn num_vectors(&self) -> usize {
        self.eigenvectors.cols()
    }

    /// Keeps only the leading `k` eigenvectors (eigenvalues are untouched).
    pub fn truncate_vectors(mut self, k: usize) -> Self {
        let k = k.min(self.eigenvectors.cols());
        let rows = self.eigenvectors.rows();
        let data = self.eigenvectors.as_slice()[..rows * k].to_vec();
        self.eigenvectors = Matrix::from_col_major(rows, k, data).expect("prefix of a valid matrix");
        self.residual_norms.truncate(k);
        self
    }
}

/// Full spectrum of a dense symmetric matrix.
///
/// Matrices up to [`JACOBI_MAX_DIM`] go through cyclic Jacobi; larger ones
/// through tridiagonal QL, which meets the same accuracy contract at a
/// fraction of the cost.
pub fn dense_symmetric_eigen(a: &Matrix) -> Result<SpectrumResult> {
    if a.rows() <= JACOBI_MAX_DIM {
        jacobi_eigen(a, DEFAULT_MAX_SWEEPS)
    } else {
        tridiagonal_ql_eigen(a)
    }
}

pub(crate) fn check_symmetric(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let tol = 1e-10 * a.max_abs().max(1.0);
    let n = a.rows();
    for j in 0..n {
        for i in 0..j {
            if (a[(i, j)] - a[(j, i)]).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    a[(i, j)],
                    a[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

/// Sorts eigenpairs by non-increasing eigenvalue and attaches residual norms.
pub(crate) fn finish_dense(a: &Matrix, values: Vec<f64>, vectors: Matrix) -> SpectrumResult {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = Matrix::zeros(vectors.rows(), n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.col_mut(dst).copy_from_slice(vectors.col(src));
    }
    let residual_norms = (0..n)
        .map(|j| {
            let v = eigenvectors.col(j);
            let mut r = a.mul_vec(v).expect("square matrix");
            axpy(-eigenvalues[j], v, &mut r);
            norm(&r)
        })
        .collect();
    SpectrumResult {
        eigenvalues,
        eigenvectors,
        residual_norms,
        method: SolverMethod::Dense,
    }
}

/// Flips `v_hat` so that `v^T v_hat >= 0`; an exact tie keeps the input sign.
pub fn sign_align(v_hat: &[f64], v: &[f64]) -> Vec<f64> {
    if dot(v, v_hat) < 0.0 {
        v_hat.iter().map(|x| -x).collect()
    } else {
        v_hat.to_vec()
    }
}

/// Split of a unit vector into its projection on `span(V)` and a unit
/// remainder orthogonal to it:
/// `v_hat = sum_k tau_k v_k + sqrt(1 - |tau|^2) * normal_part`.
#[derive(Clone, Debug, Serialize)]
pub struct TangentNormal {
    pub tau: Vec<f64>,
    pub tangent_norm: f64,
    /// Zero vector when `defined` is false.
    pub normal_part: Vec<f64>,
    /// False when `v_hat` lies (numerically) inside `span(V)`.
    pub defined: bool,
}

impl TangentNormal {
    /// Rebuilds `sum tau_k v_k + sqrt(1 - |tau|^2) normal_part`.
    pub fn reconstruct(&self, basis: &Matrix) -> Vec<f64> {
        let mut out = basis.mul_vec(&self.tau).expect("tau has one entry per basis column");
        let weight = (1.0 - self.tangent_norm * self.tangent_norm).max(0.0).sqrt();
        axpy(weight, &self.normal_part, &mut out);
        out
    }
}

pub fn tangent_normal(v_hat: &[f64], basis: &Matrix) -> Result<TangentNormal> {
    if basis.rows() != v_hat.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against a basis with {} rows",
            v_hat.len(),
            basis.rows()
        )));
    }
    let gram = basis.transpose().matmul(basis)?;
    if gram.max_abs_diff(&Matrix::identity(basis.cols())) > 1e-10 {
        return Err(Error::InvalidInput("basis columns are not orthonormal".into()));
    }

    let tau = basis.tr_mul_vec(v_hat)?;
    let tau_sq: f64 = tau.iter().map(|t| t * t).sum();
    let tangent_norm = tau_sq.sqrt();
    if tau_sq > 1.0 - 1e-12 {
        return Ok(TangentNormal {
            tau,
            tangent_norm,
            normal_part: vec![0.0; v_hat.len()],
            defined: false,
        });
    }
    let mut normal_part = v_hat.to_vec();
    let projection = basis.mul_vec(&tau)?;
    axpy(-1.0, &projection, &mut normal_part);
    let weight = (1.0 - tau_sq).sqrt();
    normal_part.iter_mut().for_each(|x| *x /= weight);
    Ok(TangentNormal {
        tau,
        tangent_norm,
        normal_part,
        defined: true,
    })
}
