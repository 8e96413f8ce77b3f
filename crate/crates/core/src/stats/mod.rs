//! Statistical primitives used to confront spectra with their predictions.

mod eigvec;
mod ks;

pub use eigvec::{
    accuracy_report, clt_report, empirical_alignment, observed_accuracy, residuals, zeta_hat, AccuracyReport, CltReport,
    DEFAULT_CLT_SUBSET,
};
pub use ks::{esd_vs_mp, kolmogorov_q, ks_statistic, KsResult, MIN_KS_SAMPLE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard normal CDF, `0.5 * erfc(-x / sqrt(2))`.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased (`m - 1`) sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Mean, unbiased variance, and skewness / excess kurtosis from the
/// (biased) central moments `m2`, `m3`, `m4`.
pub fn moments(sample: &[f64]) -> Result<Moments> {
    let m = sample.len();
    if m < 4 {
        return Err(Error::InvalidInput(format!("moments need at least 4 values, got {m}")));
    }
    let mf = m as f64;
    let mean = sample.iter().sum::<f64>() / mf;
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for &x in sample {
        let d = x - mean;
        let d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    if s2 == 0.0 {
        return Err(Error::Moments("zero variance: skewness and kurtosis are undefined".into()));
    }
    let (m2, m3, m4) = (s2 / mf, s3 / mf, s4 / mf);
    Ok(Moments {
        mean,
        variance: s2 / (mf - 1.0),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` equally spaced edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `counts / (m * width)`, with `m` the full sample size.
    pub density: Vec<f64>,
    pub underflow: usize,
    pub overflow: usize,
}

/// Equal-width histogram over `[lo, hi]`; the last bin includes `hi`.
pub fn histogram(sample: &[f64], bins: usize, (lo, hi): (f64, f64)) -> Result<Histogram> {
    if bins == 0 || !(lo < hi) {
        return Err(Error::InvalidInput(format!("need bins >= 1 and lo < hi, got {bins} bins on [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let (mut underflow, mut overflow) = (0, 0);
    for &x in sample {
        if x < lo {
            underflow += 1;
        } else if x > hi || x.is_nan() {
            overflow += 1;
        } else {
            let b = (((x - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    let m = sample.len().max(1) as f64;
    let density = counts.iter().map(|&c| c as f64 / (m * width)).collect();
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    Ok(Histogram {
        edges,
        counts,
        density,
        underflow,
        overflow,
    })
}
