//! Householder tridiagonalization followed by implicit QL.
//!
//! Port of the EISPACK `tred2`/`tql2` pair (via the public-domain JAMA
//! formulation). The orthogonal factor is stored column-major so that all
//! inner loops walk contiguous columns.

use super::{check_symmetric, finish_dense, SpectrumResult};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

const MAX_QL_ITERATIONS_PER_VALUE: usize = 60;

pub fn tridiagonal_ql_eigen(a: &Matrix) -> Result<SpectrumResult> {
    check_symmetric(a)?;
    let n = a.rows();
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let mut v = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2_core(&mut d, &mut e, &mut v)?;
    Ok(finish_dense(a, d, v))
}

/// Eigen-decomposition of a symmetric tridiagonal matrix.
///
/// `diag` has length `m`, `offdiag[i]` couples rows `i` and `i + 1`
/// (length `m - 1`). On return `diag` holds the eigenvalues (ascending) and
/// `vectors` (m x m) the matching eigenvectors as columns.
pub fn tridiagonal_ql_in_place(diag: &mut [f64], offdiag: &[f64], vectors: &mut Matrix) -> Result<()> {
    let m = diag.len();
    if offdiag.len() + 1 != m.max(1) || vectors.rows() != m || vectors.cols() != m {
        return Err(Error::DimensionMismatch("tridiagonal shapes".into()));
    }
    *vectors = Matrix::identity(m);
    // tql2 expects e[i] to couple i-1 and i.
    let mut e = vec![0.0; m];
    e[1..].copy_from_slice(offdiag);
    tql2_core(diag, &mut e, vectors)
}

/// Eigenvalues of a symmetric tridiagonal matrix together with a subset of
/// rows of its eigenvector matrix, at `O(m^2 + m |rows|)` cost per sweep.
///
/// Lanczos only needs the last row to estimate Ritz residuals.
pub(crate) fn tridiagonal_eigen_rows(diag: &[f64], offdiag: &[f64], rows: &[usize]) -> Result<(Vec<f64>, Matrix)> {
    let m = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; m];
    e[1..].copy_from_slice(&offdiag[..m - 1]);
    let mut v = Matrix::from_fn(rows.len(), m, |r, c| if rows[r] == c { 1.0 } else { 0.0 });
    tql2_core(&mut d, &mut e, &mut v)?;
    Ok((d, v))
}

fn tred2(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                let col = v.col(j);
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = v.col_mut(j);
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                {
                    let ci = v.col(i + 1);
                    let cj = v.col(j);
                    for k in 0..=i {
                        g += ci[k] * cj[k];
                    }
                }
                let cj = v.col_mut(j);
                for k in 0..=i {
                    cj[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)` with `e[i]` coupling `i - 1` and
/// `i`; rotations are accumulated into `v`. Eigenvalues are left unsorted.
fn tql2_core(d: &mut [f64], e: &mut [f64], v: &mut Matrix) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] is zero, so m < n always holds here.
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS_PER_VALUE {
                    return Err(Error::solver(
                        format!("implicit QL did not converge for eigenvalue {l}"),
                        iter,
                        None,
                    ));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_columns(v, i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[inline]
fn rotate_columns(v: &mut Matrix, i: usize, c: f64, s: f64) {
    let rows = v.rows();
    let data = v.as_mut_slice();
    let (left, right) = data.split_at_mut((i + 1) * rows);
    let ci = &mut left[i * rows..];
    let ci1 = &mut right[..rows];
    for (a, b) in ci.iter_mut().zip(ci1.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}
