use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rmt::MpLaw;

/// Below this size the asymptotic Kolmogorov p-value is not trusted.
pub const MIN_KS_SAMPLE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub sample_size: usize,
}

/// One-sample Kolmogorov-Smirnov test against a fully specified CDF.
///
/// `D = max_i max(i/m - F(x_(i)), F(x_(i)) - (i-1)/m)`; the p-value is
/// `Q(lambda)` at `lambda = (sqrt(m) + 0.12 + 0.11 / sqrt(m)) D`.
pub fn ks_statistic(sample: &[f64], reference_cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    ks_with_left_limit(sample, &reference_cdf, &reference_cdf)
}

/// KS statistic for a reference law that may have atoms: the lower
/// deviation at `x_(i)` uses the left limit `F(x-)`.
fn ks_with_left_limit(sample: &[f64], cdf: &dyn Fn(f64) -> f64, cdf_left: &dyn Fn(f64) -> f64) -> Result<KsResult> {
    let m = sample.len();
    if m < MIN_KS_SAMPLE {
        return Err(Error::InvalidInput(format!("KS test needs at least {MIN_KS_SAMPLE} values, got {m}")));
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("sample contains NaN".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mf = m as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let upper = (i + 1) as f64 / mf - cdf(x);
        let lower = cdf_left(x) - i as f64 / mf;
        d = d.max(upper).max(lower);
    }
    let d = d.clamp(0.0, 1.0);
    let sqrt_m = mf.sqrt();
    let lambda = (sqrt_m + 0.12 + 0.11 / sqrt_m) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(lambda),
        sample_size: m,
    })
}

/// Kolmogorov survival function `Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)`.
///
/// For small `lambda` the alternating series converges slowly; there the
/// equivalent theta-function form
/// `1 - sqrt(2 pi)/lambda sum_{j>=1} exp(-(2j-1)^2 pi^2 / (8 lambda^2))`
/// is summed instead. Both are truncated once terms drop below `1e-12`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let q = if lambda < 1.0 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut s = 0.0;
        for j in 1.. {
            let k = (2 * j - 1) as f64;
            let term = (-k * k * pi2 / (8.0 * lambda * lambda)).exp();
            s += term;
            if term < 1e-12 {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    } else {
        let mut s = 0.0;
        let mut sign = 1.0;
        for j in 1.. {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            s += sign * term;
            sign = -sign;
            if term < 1e-12 {
                break;
            }
        }
        2.0 * s
    };
    q.clamp(0.0, 1.0)
}

/// KS distance between the bulk of an empirical spectrum and the
/// Marčenko-Pastur CDF, after dropping the `n_exclude_top` largest
/// eigenvalues.
///
/// Bulk eigenvalues are strongly dependent, so the p-value is only
/// indicative; the statistic is the figure of merit. Eigenvalues within
/// rounding of zero are treated as exact zeros so they land on the atom.
pub fn esd_vs_mp(eigenvalues: &[f64], c: f64, n_exclude_top: usize) -> Result<KsResult> {
    let n = eigenvalues.len();
    if n_exclude_top >= n {
        return Err(Error::InvalidInput(format!("cannot exclude {n_exclude_top} of {n} eigenvalues")));
    }
    let law = MpLaw::new(c)?;
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let scale = sorted.first().map_or(1.0, |v| v.abs().max(1.0));
    let bulk: Vec<f64> = sorted[n_exclude_top..]
        .iter()
        .map(|&v| if v.abs() <= 1e-9 * scale { 0.0 } else { v })
        .collect();
    let cdf = |x: f64| law.cdf(x);
    let cdf_left = |x: f64| if x <= 0.0 { 0.0 } else { law.cdf(x) };
    ks_with_left_limit(&bulk, &cdf, &cdf_left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::stats::gaussian_cdf;
    use rand::Rng;

    #[test]
    fn quantile_sample_has_half_step_distance() {
        let m = 50;
        let sample: Vec<f64> = (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect();
        let r = ks_statistic(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((r.statistic - 0.5 / m as f64).abs() < 1e-15);
        assert!(r.p_value > 0.999);
    }

    #[test]
    fn small_samples_rejected() {
        assert!(ks_statistic(&[0.0; 7], gaussian_cdf).is_err());
    }

    #[test]
    fn kolmogorov_branches_agree() {
        for &l in &[0.8, 0.9, 1.0, 1.1, 1.3] {
            let pi2 = std::f64::consts::PI.powi(2);
            let theta: f64 = 1.0
                - (2.0 * std::f64::consts::PI).sqrt() / l
                    * (1..200).map(|j| (-((2 * j - 1) as f64).powi(2) * pi2 / (8.0 * l * l)).exp()).sum::<f64>();
            let series: f64 = 2.0 * (1..200).map(|j| (-1f64).powi(j - 1) * (-2.0 * (j * j) as f64 * l * l).exp()).sum::<f64>();
            assert!((theta - series).abs() < 1e-12);
            assert!((kolmogorov_q(l) - series).abs() < 1e-12);
        }
        assert_eq!(kolmogorov_q(0.0), 1.0);
        // Critical value of the asymptotic distribution at alpha = 0.05.
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 5e-4);
    }

    #[test]
    fn uniform_draws_reject_normal() {
        let mut r = rng::stream(3, "ks-uniform");
        let sample: Vec<f64> = (0..1000).map(|_| r.random::<f64>()).collect();
        let res = ks_statistic(&sample, gaussian_cdf).unwrap();
        assert!(res.p_value < 1e-6, "{res:?}");
    }

    #[test]
    fn null_calibration_over_seeds() {
        let mut passes = 0;
        for seed in 0..100 {
            let mut s = vec![0.0; 1000];
            rng::fill_standard_normal(&mut rng::stream(seed, "ks-null"), &mut s);
            if ks_statistic(&s, gaussian_cdf).unwrap().p_value > 0.01 {
                passes += 1;
            }
        }
        assert!(passes >= 95, "{passes}");

        let mut rejections = 0;
        for seed in 0..200 {
            let mut s = vec![0.0; 200];
            rng::fill_standard_normal(&mut rng::stream(seed, "ks-null-200"), &mut s);
            if ks_statistic(&s, gaussian_cdf).unwrap().p_value <= 0.01 {
                rejections += 1;
            }
        }
        assert!(rejections <= 6, "{rejections} of 200");
    }

    #[test]
    fn atom_is_not_counted_as_misfit() {
        // Half zeros, half spread over the bulk for c = 0.5.
        let law = MpLaw::new(0.5).unwrap();
        let mut sample = vec![0.0; 100];
        sample.extend((0..100).map(|i| law.e_minus + (law.e_plus - law.e_minus) * (i as f64 + 0.5) / 100.0));
        let r = esd_vs_mp(&sample, 0.5, 0).unwrap();
        assert!(r.statistic < 0.5, "{r:?}");
        let all_zero = esd_vs_mp(&[0.0; 20], 0.5, 0).unwrap();
        assert!((all_zero.statistic - 0.5).abs() < 1e-15);
    }

    #[test]
    fn esd_requires_remaining_bulk() {
        assert!(esd_vs_mp(&[1.0, 2.0], 1.0, 2).is_err());
    }
}
