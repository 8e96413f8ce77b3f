use super::tridiagonal::{tridiagonal_eigen_rows, tridiagonal_ql_in_place};
use super::{SolverMethod, SpectrumResult, SymmetricOperator};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, normalize, Matrix};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    pub k: usize,
    /// Converged when every returned pair has `||A v - theta v|| <= tol * |theta_1|`.
    pub tol: f64,
    /// Krylov dimension cap.
    pub max_iter: usize,
    pub seed: u64,
}

impl LanczosOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        LanczosOptions {
            k,
            tol: 1e-10,
            max_iter: 300,
            seed,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn solve<O: SymmetricOperator + ?Sized>(&self, op: &O) -> Result<SpectrumResult> {
        lanczos_topk(op, self.k, self.tol, self.max_iter, self.seed)
    }
}

/// Top-`k` eigenpairs of a symmetric operator by Lanczos with full
/// reorthogonalization.
///
/// Every new Krylov vector is orthogonalized twice against the whole basis,
/// which keeps the basis orthonormal to working precision and rules out
/// spurious copies of converged Ritz values. Convergence is judged on the
/// residual norm of each Ritz pair. The start vector is drawn from the
/// seeded stream, so results are reproducible.
pub fn lanczos_topk<O: SymmetricOperator + ?Sized>(op: &O, k: usize, tol: f64, max_iter: usize, seed: u64) -> Result<SpectrumResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("requested {k} eigenpairs of a {n}-dimensional operator")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let limit = max_iter.min(n);
    if limit < k {
        return Err(Error::InvalidInput(format!("max_iter {max_iter} is below k = {k}")));
    }

    let mut rng = rng::stream(seed, rng::LANCZOS_START);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(limit);
    let mut alphas: Vec<f64> = Vec::with_capacity(limit);
    let mut betas: Vec<f64> = Vec::with_capacity(limit);
    let mut w = vec![0.0; n];
    let mut scale_estimate = 0.0_f64;

    let first = random_orthogonal_start(&mut rng, &basis, n).ok_or_else(|| Error::InvalidInput("could not draw a start vector".into()))?;
    basis.push(first);

    loop {
        let j = basis.len() - 1;
        op.apply_into(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w);
        axpy(-alpha, &basis[j], &mut w);
        if j > 0 {
            axpy(-betas[j - 1], &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let beta = norm(&w);
        alphas.push(alpha);
        scale_estimate = scale_estimate.max(alpha.abs() + beta);
        let m = alphas.len();

        if m >= k && (m == limit || should_check(m, k)) {
            let (theta, last_row) = tridiagonal_eigen_rows(&alphas, &betas, &[m - 1])?;
            let order = descending(&theta);
            let top = &order[..k];
            let scale = theta.iter().fold(0.0_f64, |acc, t| acc.max(t.abs())).max(f64::MIN_POSITIVE);
            let estimates_ok = top.iter().all(|&i| beta * last_row[(0, i)].abs() <= tol * scale);
            if estimates_ok || m == limit {
                let result = ritz_pairs(op, &basis, &alphas, &betas, k)?;
                let worst = result.residual_norms.iter().fold(0.0_f64, |a, &r| a.max(r));
                let exhausted = m == n;
                if worst <= tol * scale || exhausted {
                    return Ok(result);
                }
                if m == limit {
                    return Err(Error::solver(
                        format!("Lanczos reached {m} iterations with residual {worst:.3e} > {:.3e}", tol * scale),
                        m,
                        Some(result),
                    ));
                }
            }
        }

        if m == limit {
            // Unreachable in practice: the check above always runs at the limit.
            return Err(Error::solver("Lanczos iteration limit reached", m, None));
        }

        if beta <= 1e-12 * scale_estimate.max(f64::MIN_POSITIVE) {
            // Invariant subspace found; continue in its orthogonal complement.
            betas.push(0.0);
            match random_orthogonal_start(&mut rng, &basis, n) {
                Some(q) => basis.push(q),
                None => {
                    let result = ritz_pairs(op, &basis, &alphas, &betas[..m - 1], k)?;
                    return Ok(result);
                }
            }
        } else {
            betas.push(beta);
            let mut q = w.clone();
            q.iter_mut().for_each(|x| *x /= beta);
            basis.push(q);
        }
    }
}

fn should_check(m: usize, k: usize) -> bool {
    m <= k + 20 || m % 5 == 0
}

fn descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

fn random_orthogonal_start(rng: &mut rand_chacha::ChaCha8Rng, basis: &[Vec<f64>], n: usize) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut q = vec![0.0; n];
        rng::fill_standard_normal(rng, &mut q);
        let initial = norm(&q);
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &q);
                axpy(-c, b, &mut q);
            }
        }
        if normalize(&mut q) > 1e-8 * initial {
            return Some(q);
        }
    }
    None
}

/// Forms the top-`k` Ritz pairs of the current basis and their true residuals.
fn ritz_pairs<O: SymmetricOperator + ?Sized>(op: &O, basis: &[Vec<f64>], alphas: &[f64], betas: &[f64], k: usize) -> Result<SpectrumResult> {
    let m = alphas.len();
    let n = op.dim();
    let mut theta = alphas.to_vec();
    let mut s = Matrix::zeros(m, m);
    tridiagonal_ql_in_place(&mut theta, &betas[..m - 1], &mut s)?;
    let order = descending(&theta);

    let mut vectors = Matrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        let y = vectors.col_mut(dst);
        for (q, &coef) in basis.iter().zip(s.col(src)) {
            axpy(coef, q, y);
        }
        normalize(y);
        let mut r = op.apply(vectors.col(dst));
        axpy(-theta[src], vectors.col(dst), &mut r);
        residuals.push(norm(&r));
        values.push(theta[src]);
    }
    Ok(SpectrumResult {
        eigenvalues: values,
        eigenvectors: vectors,
        residual_norms: residuals,
        method: SolverMethod::Lanczos,
    })
}
