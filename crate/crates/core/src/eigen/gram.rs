use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Matrix};

/// A symmetric linear map available only through matrix-vector products.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// Writes `A x` into `out`; both slices have length [`Self::dim`].
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }
}

/// Matrix-free Gram kernel `v -> (1/p) X^T (X v)` over a borrowed data matrix.
#[derive(Clone, Copy, Debug)]
pub struct GramOperator<'a> {
    x: &'a Matrix,
}

impl<'a> GramOperator<'a> {
    pub fn new(x: &'a Matrix) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::InvalidInput("empty data matrix".into()));
        }
        Ok(GramOperator { x })
    }

    /// Feature dimension.
    pub fn p(&self) -> usize {
        self.x.rows()
    }

    /// Sample count, i.e. the operator dimension.
    pub fn n(&self) -> usize {
        self.x.cols()
    }

    pub fn data(&self) -> &'a Matrix {
        self.x
    }
}

impl SymmetricOperator for GramOperator<'_> {
    fn dim(&self) -> usize {
        self.x.cols()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let mut xv = vec![0.0; self.x.rows()];
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                axpy(vj, self.x.col(j), &mut xv);
            }
        }
        let inv_p = 1.0 / self.x.rows() as f64;
        for (o, col) in out.iter_mut().zip(self.x.columns()) {
            *o = dot(col, &xv) * inv_p;
        }
    }
}

/// A materialized symmetric matrix viewed as an operator.
#[derive(Clone, Copy, Debug)]
pub struct DenseOperator<'a> {
    a: &'a Matrix,
}

impl<'a> DenseOperator<'a> {
    pub fn new(a: &'a Matrix) -> Result<Self> {
        super::check_symmetric(a)?;
        Ok(DenseOperator { a })
    }
}

impl SymmetricOperator for DenseOperator<'_> {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        // Symmetric, so A x = A^T x and the column dots are contiguous.
        for (o, col) in out.iter_mut().zip(self.a.columns()) {
            *o = dot(col, x);
        }
    }
}

/// `(1/p) X^T (X v)` without forming the kernel.
pub fn gram_apply(op: &GramOperator<'_>, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != op.n() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a kernel of size {}",
            v.len(),
            op.n()
        )));
    }
    Ok(op.apply(v))
}

/// Dense `(1/p) X^T X`. Each unordered pair is computed once and mirrored,
/// so the result is exactly symmetric.
pub fn gram_matrix(x: &Matrix) -> Result<Matrix> {
    let (p, n) = (x.rows(), x.cols());
    if p == 0 || n == 0 {
        return Err(Error::InvalidInput("empty data matrix".into()));
    }
    let inv_p = 1.0 / p as f64;
    let mut k = Matrix::zeros(n, n);
    const TILE: usize = 32;
    for jb in (0..n).step_by(TILE) {
        let j_end = (jb + TILE).min(n);
        for ib in (0..j_end).step_by(TILE) {
            let i_end = (ib + TILE).min(n);
            for j in jb..j_end {
                let cj = x.col(j);
                for i in ib..i_end.min(j + 1) {
                    let v = dot(x.col(i), cj) * inv_p;
                    k[(i, j)] = v;
                    k[(j, i)] = v;
                }
            }
        }
    }
    Ok(k)
}
