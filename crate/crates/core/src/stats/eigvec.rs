use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{gaussian_cdf, ks_statistic, moments, KsResult, Moments};
use crate::eigen::sign_align;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::rmt::predicted_accuracy_binary;
use crate::rng;

pub const DEFAULT_CLT_SUBSET: usize = 200;

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::DimensionMismatch(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    Ok(())
}

fn check_labels(j: &[f64]) -> Result<()> {
    if let Some(bad) = j.iter().find(|&&x| x != 1.0 && x != -1.0) {
        return Err(Error::InvalidInput(format!("labels must be +1 or -1, found {bad}")));
    }
    Ok(())
}

/// `(v^T v_hat)^2`, clamped to `[0, 1]`.
pub fn empirical_alignment(v_hat: &[f64], v: &[f64]) -> Result<f64> {
    check_lengths(v_hat, v)?;
    let d = dot(v, v_hat);
    Ok((d * d).min(1.0))
}

/// Plug-in alignment estimate `(sum_i j_i v_hat_i / sqrt(n))^2`.
pub fn zeta_hat(v_hat: &[f64], j: &[f64]) -> Result<f64> {
    check_lengths(v_hat, j)?;
    check_labels(j)?;
    let s = dot(j, v_hat) / (j.len() as f64).sqrt();
    Ok(s * s)
}

/// Fraction of entries with `s * v_hat_i * j_i > 0`, where
/// `s = sign(sum j_i v_hat_i)` (ties resolve to `+1`). Zero entries are errors.
pub fn observed_accuracy(v_hat: &[f64], j: &[f64]) -> Result<f64> {
    check_lengths(v_hat, j)?;
    check_labels(j)?;
    let s = if dot(j, v_hat) < 0.0 { -1.0 } else { 1.0 };
    let hits = v_hat.iter().zip(j).filter(|(&v, &l)| s * v * l > 0.0).count();
    Ok(hits as f64 / j.len() as f64)
}

/// Normalized fluctuations `sqrt(n) (v_hat - sqrt(zeta) v) / sqrt(1 - zeta)`.
///
/// `v_hat` must already be sign-aligned with `v`.
pub fn residuals(v_hat: &[f64], v: &[f64], zeta: f64) -> Result<Vec<f64>> {
    check_lengths(v_hat, v)?;
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::InvalidInput(format!("zeta must lie in [0, 1), got {zeta}")));
    }
    let sn = (v_hat.len() as f64).sqrt();
    let sz = zeta.sqrt();
    let denom = (1.0 - zeta).sqrt();
    Ok(v_hat.iter().zip(v).map(|(&a, &b)| sn * (a - sz * b) / denom).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub spike_index: usize,
    pub zeta_used: f64,
    pub residuals: Vec<f64>,
    pub subset_indices: Vec<usize>,
    /// Moments of the full residual vector.
    pub moments: Moments,
    /// KS test of the residuals on `subset_indices` against `N(0, 1)`.
    pub ks: KsResult,
}

/// Sign-aligns `v_hat` with `v`, normalizes the residuals with `zeta`, and
/// KS-tests a uniformly drawn subset of `subset` distinct entries.
///
/// The subset is drawn from a stream keyed by `seed`, so the report is
/// reproducible. Pass `align = false` to skip the sign alignment (useful
/// only as a sanity check that a wrong sign is detected).
pub fn clt_report(spike_index: usize, v_hat: &[f64], v: &[f64], zeta: f64, subset: usize, seed: u64, align: bool) -> Result<CltReport> {
    check_lengths(v_hat, v)?;
    let n = v.len();
    if subset > n {
        return Err(Error::InvalidInput(format!("subset of {subset} entries requested from {n}")));
    }
    let aligned = if align { sign_align(v_hat, v) } else { v_hat.to_vec() };
    let res = residuals(&aligned, v, zeta)?;
    let mut r = rng::stream(seed, rng::CLT_SUBSET);
    let mut subset_indices = index::sample(&mut r, n, subset).into_vec();
    subset_indices.sort_unstable();
    let picked: Vec<f64> = subset_indices.iter().map(|&i| res[i]).collect();
    let ks = ks_statistic(&picked, gaussian_cdf)?;
    let moments = moments(&res)?;
    Ok(CltReport {
        spike_index,
        zeta_used: zeta,
        residuals: res,
        subset_indices,
        moments,
        ks,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub zeta_hat: f64,
    pub observed: f64,
    pub predicted: f64,
    pub n: usize,
    pub pair: (usize, usize),
}

/// Observed two-class accuracy of `v_hat` together with the prediction from
/// the plug-in alignment.
pub fn accuracy_report(v_hat: &[f64], j: &[f64], pair: (usize, usize)) -> Result<AccuracyReport> {
    let z = zeta_hat(v_hat, j)?;
    let observed = observed_accuracy(v_hat, j)?;
    // zeta_hat reaches 1 only for a perfect indicator vector.
    let predicted = if z >= 1.0 { 1.0 } else { predicted_accuracy_binary(z)? };
    Ok(AccuracyReport {
        zeta_hat: z,
        observed,
        predicted,
        n: j.len(),
        pair,
    })
}
