use super::{check_symmetric, finish_dense, SpectrumResult};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigenvalue algorithm.
///
/// Sweeps over all pairs `(p, q)` applying the plane rotation that
/// annihilates `a_pq`, until the off-diagonal Frobenius norm falls below
/// `1e-12 * ||A||_F`. Rotations are accumulated into the eigenvector matrix.
pub fn jacobi_eigen(a: &Matrix, max_sweeps: usize) -> Result<SpectrumResult> {
    check_symmetric(a)?;
    let n = a.rows();
    // Symmetrize exactly so rotations act on a truly symmetric matrix.
    let mut w = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);
    let target = 1e-12 * w.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&w);
        if off <= target {
            break;
        }
        if sweeps == max_sweeps {
            let values = (0..n).map(|i| w[(i, i)]).collect();
            let partial = finish_dense(a, values, v);
            return Err(Error::solver(
                format!("Jacobi did not converge: off-diagonal norm {off:.3e} > {target:.3e}"),
                sweeps,
                Some(partial),
            ));
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let values = (0..n).map(|i| w[(i, i)]).collect();
    Ok(finish_dense(a, values, v))
}

fn off_diagonal_norm(w: &Matrix) -> f64 {
    let n = w.rows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..j {
            s += w[(i, j)] * w[(i, j)];
        }
    }
    (2.0 * s).sqrt()
}

fn rotate(w: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = w[(p, p)];
    let aqq = w[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = w.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = w[(k, p)];
        let akq = w[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        w[(k, p)] = new_kp;
        w[(p, k)] = new_kp;
        w[(k, q)] = new_kq;
        w[(q, k)] = new_kq;
    }
    w[(p, p)] = app - t * apq;
    w[(q, q)] = aqq + t * apq;
    w[(p, q)] = 0.0;
    w[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
