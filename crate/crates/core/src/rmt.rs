//! Closed-form random-matrix predictions for `K = (1/p) X^T X` with
//! `X = L V^T + W`, `W` i.i.d. `N(0, 1)` and `c = p / n`.
//!
//! - bulk: Marčenko-Pastur law with edges `(1 ± sqrt(1/c))^2` and an atom of
//!   mass `max(0, 1 - c)` at zero;
//! - spikes: for `ell > sqrt(c)` the eigenvalue leaves the bulk at
//!   `xi = (ell + c)(ell + 1) / (ell c)` and its eigenvector has squared
//!   alignment `zeta = 1 - (ell + c) / (ell (ell + 1))` with the signal;
//!   otherwise `xi = E+` and `zeta = 0`;
//! - fluctuations: entries of a spike eigenvector are asymptotically
//!   `N(sqrt(zeta) v_i, (1 - zeta) / n)`.
//!
//! At `ell = sqrt(c)` exactly the undetectable branch is taken.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::stats::gaussian_cdf;

const CDF_QUAD_TOL: f64 = 1e-11;
const CDF_QUAD_DEPTH: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpLaw {
    pub c: f64,
    pub e_minus: f64,
    pub e_plus: f64,
    pub atom_mass: f64,
}

impl MpLaw {
    pub fn new(c: f64) -> Result<Self> {
        let (e_minus, e_plus) = mp_edges(c)?;
        Ok(MpLaw {
            c,
            e_minus,
            e_plus,
            atom_mass: (1.0 - c).max(0.0),
        })
    }

    /// Density of the continuous part; the atom at zero is not included.
    pub fn density(&self, x: f64) -> f64 {
        if x <= self.e_minus || x >= self.e_plus || x <= 0.0 {
            return 0.0;
        }
        self.c * ((self.e_plus - x) * (x - self.e_minus)).sqrt() / (2.0 * std::f64::consts::PI * x)
    }

    /// Mass of the continuous part, `min(1, c)`.
    pub fn bulk_mass(&self) -> f64 {
        1.0 - self.atom_mass
    }

    /// `P(lambda <= x)`, atom included.
    ///
    /// The continuous part is integrated in the angle `theta` with
    /// `x = E- + (E+ - E-)(1 - cos theta) / 2`, which turns the square-root
    /// edge behaviour (and the `1/sqrt(x)` pole at `c = 1`) into a smooth
    /// integrand.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let atom = self.atom_mass;
        if x <= self.e_minus {
            return atom;
        }
        if x >= self.e_plus {
            return 1.0;
        }
        let half_width = 0.5 * (self.e_plus - self.e_minus);
        let u = (1.0 - (x - self.e_minus) / half_width).clamp(-1.0, 1.0);
        let theta_max = u.acos();
        let c = self.c;
        let e_minus = self.e_minus;
        let integrand = move |theta: f64| {
            let (s, co) = theta.sin_cos();
            let t = e_minus + half_width * (1.0 - co);
            if t <= 0.0 {
                // c = 1, theta = 0: sin^2(theta) / (1 - cos theta) -> 2.
                return c * half_width * half_width * 2.0 / (2.0 * std::f64::consts::PI * half_width);
            }
            c * half_width * half_width * s * s / (2.0 * std::f64::consts::PI * t)
        };
        let bulk = adaptive_simpson(&integrand, 0.0, theta_max, CDF_QUAD_TOL, CDF_QUAD_DEPTH);
        (atom + bulk).clamp(0.0, 1.0)
    }
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("aspect ratio c must be positive and finite, got {c}")))
    }
}

fn check_ell(ell: f64) -> Result<()> {
    if ell.is_finite() && ell > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("signal strength ell must be positive and finite, got {ell}")))
    }
}

pub fn mp_edges(c: f64) -> Result<(f64, f64)> {
    check_c(c)?;
    let r = (1.0 / c).sqrt();
    Ok(((1.0 - r).powi(2), (1.0 + r).powi(2)))
}

/// Bulk density at `x`; `NaN` for a non-positive `c`.
pub fn mp_density(x: f64, c: f64) -> f64 {
    MpLaw::new(c).map_or(f64::NAN, |law| law.density(x))
}

/// Bulk CDF at `x`; `NaN` for a non-positive `c`.
pub fn mp_cdf(x: f64, c: f64) -> f64 {
    MpLaw::new(c).map_or(f64::NAN, |law| law.cdf(x))
}

pub fn is_detectable(ell: f64, c: f64) -> bool {
    ell > c.sqrt()
}

pub fn spike_position(ell: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    check_ell(ell)?;
    if is_detectable(ell, c) {
        Ok((ell + c) * (ell + 1.0) / (ell * c))
    } else {
        Ok(mp_edges(c)?.1)
    }
}

pub fn spike_alignment(ell: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    check_ell(ell)?;
    if is_detectable(ell, c) {
        Ok(1.0 - (ell + c) / (ell * (ell + 1.0)))
    } else {
        Ok(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikePrediction {
    pub ell: f64,
    pub detectable: bool,
    pub xi: f64,
    pub zeta: f64,
}

pub fn predict_spike(ell: f64, c: f64) -> Result<SpikePrediction> {
    Ok(SpikePrediction {
        ell,
        detectable: is_detectable(ell, c),
        xi: spike_position(ell, c)?,
        zeta: spike_alignment(ell, c)?,
    })
}

fn check_zeta(zeta: f64) -> Result<()> {
    if (0.0..1.0).contains(&zeta) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("alignment zeta must lie in [0, 1), got {zeta}")))
    }
}

/// Asymptotic mean and standard deviation of one spike eigenvector entry
/// whose signal coordinate is `v_entry`.
pub fn clt_params(zeta: f64, v_entry: f64, n: usize) -> Result<(f64, f64)> {
    check_zeta(zeta)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    Ok((zeta.sqrt() * v_entry, ((1.0 - zeta) / n as f64).sqrt()))
}

/// Two-class accuracy from the dominant eigenvector: `Phi(sqrt(zeta / (1 - zeta)))`.
pub fn predicted_accuracy_binary(zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    Ok(gaussian_cdf((zeta / (1.0 - zeta)).sqrt()))
}

/// Probability that a member of class `k` scores higher on `v_k` than on
/// `v_k'`: `Phi(sqrt((n / n_k) zeta_k / (2 - zeta_k - zeta_k')))`.
///
/// Assumes asymptotic independence of the two eigenvectors.
pub fn predicted_accuracy_multiclass(zeta_k: f64, zeta_kp: f64, n: usize, n_k: usize) -> Result<f64> {
    if n_k == 0 || n_k > n {
        return Err(Error::InvalidInput(format!("class size {n_k} out of range for n = {n}")));
    }
    if zeta_k < 0.0 || zeta_kp < 0.0 {
        return Err(Error::InvalidInput("alignments must be non-negative".into()));
    }
    let denom = 2.0 - zeta_k - zeta_kp;
    if !(denom > 0.0) {
        return Err(Error::InvalidInput(format!("zeta_k + zeta_k' must be below 2, got {}", zeta_k + zeta_kp)));
    }
    Ok(gaussian_cdf((n as f64 / n_k as f64 * zeta_k / denom).sqrt()))
}
