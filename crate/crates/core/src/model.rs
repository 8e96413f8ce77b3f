//! The spiked model `X = M J^T + sigma W`: configuration, sampling and
//! checks of the standing assumptions (comparable class sizes,
//! delocalized class structure, simple signal eigenvalues).

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::eigen::jacobi_eigen;
use crate::error::{Error, Result};
use crate::linalg::{dot, normalize, Matrix};
use crate::rng;

/// Minimum `n_k / n` accepted as "comparable" class sizes.
pub const MIN_CLASS_FRACTION: f64 = 0.01;
/// Largest `sqrt(n) V_ik^2` accepted as delocalized.
pub const MAX_DELOCALIZATION: f64 = 0.5;
/// Default degeneracy tolerance, relative to `ell_1`.
pub const DEGENERACY_RTOL: f64 = 1e-9;

fn default_noise_std() -> f64 {
    1.0
}

/// Parameters of one synthetic draw.
///
/// `noise_std` scales the noise but not the signal strengths: the spike
/// predictions assume unit noise, so configurations with `noise_std != 1`
/// should be read with `ell / noise_std^2` in mind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub p: usize,
    pub n: usize,
    pub class_sizes: Vec<usize>,
    pub mean_norms: Vec<f64>,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    pub seed: u64,
}

impl ModelConfig {
    /// Three classes (333, 334, 333), mean norms (3, 4, 5), `n = 1000`, `p = 2000`.
    pub fn three_class_default(seed: u64) -> Self {
        ModelConfig {
            p: 2000,
            n: 1000,
            class_sizes: vec![333, 334, 333],
            mean_norms: vec![3.0, 4.0, 5.0],
            noise_std: 1.0,
            seed,
        }
    }

    pub fn k(&self) -> usize {
        self.class_sizes.len()
    }

    /// Dimension ratio `c = p / n`.
    pub fn c(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.p == 0 || self.n == 0 {
            return bad(format!("p and n must be positive, got p = {}, n = {}", self.p, self.n));
        }
        if self.class_sizes.is_empty() {
            return bad("class_sizes must not be empty".into());
        }
        if self.class_sizes.iter().any(|&s| s == 0) {
            return bad("class sizes must be positive".into());
        }
        let total: usize = self.class_sizes.iter().sum();
        if total != self.n {
            return bad(format!("class sizes sum to {total}, expected n = {}", self.n));
        }
        if self.mean_norms.len() != self.k() {
            return bad(format!("{} mean norms for {} classes", self.mean_norms.len(), self.k()));
        }
        if self.mean_norms.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return bad("mean norms must be positive and finite".into());
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std must be non-negative and finite, got {}", self.noise_std));
        }
        if self.k() > self.p {
            return bad(format!("{} orthogonal means do not fit in dimension p = {}", self.k(), self.p));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ModelConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// One-hot memberships `J` (n x K) and `V = J D^{-1/2}`, samples ordered by class.
pub fn build_class_structure(class_sizes: &[usize]) -> Result<(Matrix, Matrix)> {
    if class_sizes.is_empty() || class_sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidConfig("class sizes must be a non-empty list of positive counts".into()));
    }
    let n: usize = class_sizes.iter().sum();
    let k = class_sizes.len();
    let mut j = Matrix::zeros(n, k);
    let mut v = Matrix::zeros(n, k);
    let mut start = 0;
    for (c, &size) in class_sizes.iter().enumerate() {
        let w = 1.0 / (size as f64).sqrt();
        for i in start..start + size {
            j[(i, c)] = 1.0;
            v[(i, c)] = w;
        }
        start += size;
    }
    Ok((j, v))
}

/// `p x K` matrix of mutually orthogonal columns with the given norms.
///
/// Gaussian columns are orthonormalized by two passes of Gram-Schmidt, then
/// scaled.
pub fn generate_means(p: usize, mean_norms: &[f64], seed: u64) -> Result<Matrix> {
    let k = mean_norms.len();
    if k == 0 || k > p {
        return Err(Error::InvalidConfig(format!("cannot fit {k} orthogonal means in dimension {p}")));
    }
    let mut r = rng::stream(seed, rng::MEANS);
    let mut m = Matrix::zeros(p, k);
    for c in 0..k {
        loop {
            let mut col = vec![0.0; p];
            rng::fill_standard_normal(&mut r, &mut col);
            for _ in 0..2 {
                for prev in 0..c {
                    let q = m.col(prev);
                    let proj = dot(q, &col);
                    col.iter_mut().zip(q).for_each(|(x, qi)| *x -= proj * qi);
                }
            }
            if normalize(&mut col) > 1e-8 {
                m.col_mut(c).copy_from_slice(&col);
                break;
            }
        }
    }
    for (c, &norm) in mean_norms.iter().enumerate() {
        m.col_mut(c).iter_mut().for_each(|x| *x *= norm);
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDataset {
    /// `p x n`, columns are samples.
    pub x: Matrix,
    /// `p x K` cluster means.
    pub means: Matrix,
    /// `n x K` one-hot memberships.
    pub membership: Matrix,
    /// `n x K`, `J D^{-1/2}`.
    pub v: Matrix,
    pub labels: Vec<usize>,
    pub config: ModelConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SampleOptions {
    /// Shuffle the samples instead of ordering them by class.
    pub permute: bool,
}

pub fn sample_dataset(config: &ModelConfig) -> Result<SyntheticDataset> {
    sample_dataset_with(config, SampleOptions::default())
}

pub fn sample_dataset_with(config: &ModelConfig, options: SampleOptions) -> Result<SyntheticDataset> {
    config.validate()?;
    let (p, n) = (config.p, config.n);
    let means = generate_means(p, &config.mean_norms, config.seed)?;
    let (mut membership, mut v) = build_class_structure(&config.class_sizes)?;
    let mut labels: Vec<usize> = config.class_sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect();

    if options.permute {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::stream(config.seed, rng::PERMUTATION));
        let k = config.k();
        membership = Matrix::from_fn(n, k, |i, c| membership[(order[i], c)]);
        v = Matrix::from_fn(n, k, |i, c| v[(order[i], c)]);
        labels = order.iter().map(|&i| labels[i]).collect();
    }

    let mut x = Matrix::zeros(p, n);
    rng::fill_standard_normal(&mut rng::stream(config.seed, rng::NOISE), x.as_mut_slice());
    let sigma = config.noise_std;
    for (i, &label) in labels.iter().enumerate() {
        let mu = means.col(label).to_vec();
        x.col_mut(i).iter_mut().zip(&mu).for_each(|(xi, m)| *xi = sigma * *xi + m);
    }

    Ok(SyntheticDataset {
        x,
        means,
        membership,
        v,
        labels,
        config: config.clone(),
    })
}

impl SyntheticDataset {
    pub fn k(&self) -> usize {
        self.config.k()
    }

    pub fn c(&self) -> f64 {
        self.config.c()
    }

    /// `(1/n) L^T L` with `L = M D^{1/2}`.
    fn signal_matrix(&self) -> Matrix {
        let k = self.k();
        let n = self.config.n as f64;
        let sizes: Vec<f64> = self.config.class_sizes.iter().map(|&s| s as f64).collect();
        Matrix::from_fn(k, k, |a, b| (sizes[a] * sizes[b]).sqrt() * dot(self.means.col(a), self.means.col(b)) / n)
    }

    /// Signal strengths `ell_1 >= ... >= ell_K`, eigenvalues of `(1/n) L^T L`.
    pub fn theoretical_snrs(&self) -> Result<Vec<f64>> {
        Ok(jacobi_eigen(&self.signal_matrix(), crate::eigen::DEFAULT_MAX_SWEEPS)?.eigenvalues)
    }

    /// Unit signal directions `v_k` in sample space (n x K), ordered like
    /// [`Self::theoretical_snrs`], each with a non-negative entry sum.
    ///
    /// For orthogonal means these are the columns of `V` reordered by
    /// strength; in general they are `V R` with `R` the eigenvectors of
    /// `(1/n) L^T L`.
    pub fn spike_directions(&self) -> Result<Matrix> {
        let eig = jacobi_eigen(&self.signal_matrix(), crate::eigen::DEFAULT_MAX_SWEEPS)?;
        let mut dirs = self.v.matmul(&eig.eigenvectors)?;
        for c in 0..dirs.cols() {
            let col = dirs.col_mut(c);
            if col.iter().sum::<f64>() < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
        }
        Ok(dirs)
    }
}

/// Convenience wrapper around [`SyntheticDataset::theoretical_snrs`].
pub fn theoretical_snrs(ds: &SyntheticDataset) -> Result<Vec<f64>> {
    ds.theoretical_snrs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionFlags {
    pub comparable_sizes: bool,
    pub delocalized: bool,
    pub non_degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub min_class_fraction: f64,
    /// `max_{i,k} sqrt(n) V_ik^2`.
    pub max_delocalization: f64,
    pub snr_values: Vec<f64>,
    /// Smallest of the consecutive gaps `ell_k - ell_{k+1}` and of `ell_K` itself.
    pub min_snr_gap: f64,
    pub degeneracy_tol: f64,
    pub flags: AssumptionFlags,
}

/// Raw diagnostics for the standing assumptions plus pass/fail flags.
///
/// `degeneracy_tol` is absolute; `None` uses `1e-9 * ell_1`.
pub fn validate_assumptions(ds: &SyntheticDataset, degeneracy_tol: Option<f64>) -> Result<AssumptionReport> {
    let n = ds.config.n as f64;
    let min_size = *ds.config.class_sizes.iter().min().expect("validated config has classes");
    let min_class_fraction = min_size as f64 / n;
    let max_v2 = ds.v.as_slice().iter().fold(0.0_f64, |a, &x| a.max(x * x));
    let max_delocalization = n.sqrt() * max_v2;

    let snr_values = ds.theoretical_snrs()?;
    let mut min_snr_gap = *snr_values.last().expect("K >= 1");
    for w in snr_values.windows(2) {
        min_snr_gap = min_snr_gap.min(w[0] - w[1]);
    }
    let tol = degeneracy_tol.unwrap_or(DEGENERACY_RTOL * snr_values[0].abs());

    Ok(AssumptionReport {
        min_class_fraction,
        max_delocalization,
        min_snr_gap: min_snr_gap.max(0.0),
        degeneracy_tol: tol,
        flags: AssumptionFlags {
            comparable_sizes: min_class_fraction >= MIN_CLASS_FRACTION,
            delocalized: max_delocalization <= MAX_DELOCALIZATION,
            non_degenerate: min_snr_gap > tol,
        },
        snr_values,
    })
}

/// Two equal classes with labels `j = (+1, ..., +1, -1, ..., -1)` and
/// `X = mu j^T + W`, `||mu||^2 = ell`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryConfig {
    pub p: usize,
    pub n: usize,
    pub ell: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryDataset {
    pub x: Matrix,
    pub mu: Vec<f64>,
    /// `+1` for the first `n / 2` samples (rounded up), `-1` after.
    pub j: Vec<f64>,
}

impl BinaryDataset {
    /// Unit signal direction `j / sqrt(n)`.
    pub fn direction(&self) -> Vec<f64> {
        let s = (self.j.len() as f64).sqrt();
        self.j.iter().map(|x| x / s).collect()
    }
}

pub fn sample_binary(config: &BinaryConfig) -> Result<BinaryDataset> {
    if config.p == 0 || config.n < 2 {
        return Err(Error::InvalidConfig(format!("need p >= 1 and n >= 2, got p = {}, n = {}", config.p, config.n)));
    }
    if !(config.ell > 0.0 && config.ell.is_finite()) {
        return Err(Error::InvalidConfig(format!("ell must be positive, got {}", config.ell)));
    }
    let mu = generate_means(config.p, &[config.ell.sqrt()], config.seed)?.col(0).to_vec();
    let half = config.n.div_ceil(2);
    let j: Vec<f64> = (0..config.n).map(|i| if i < half { 1.0 } else { -1.0 }).collect();
    let mut x = Matrix::zeros(config.p, config.n);
    rng::fill_standard_normal(&mut rng::stream(config.seed, rng::NOISE), x.as_mut_slice());
    for (i, &ji) in j.iter().enumerate() {
        x.col_mut(i).iter_mut().zip(&mu).for_each(|(xi, m)| *xi += ji * m);
    }
    Ok(BinaryDataset { x, mu, j })
}
