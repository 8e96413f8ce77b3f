//! Two-class synthetic accuracy check (not exposed as a subcommand).

use serde::Serialize;
use spikelab_core::model::{sample_binary, BinaryConfig};
use spikelab_core::rmt::{predict_spike, predicted_accuracy_binary, SpikePrediction};
use spikelab_core::stats::{observed_accuracy, zeta_hat};

use super::top_spectrum;
use crate::error::CliResult;

#[derive(Clone, Debug, Serialize)]
pub struct BinaryOutcome {
    pub prediction: SpikePrediction,
    /// Accuracy predicted from the theoretical alignment.
    pub predicted: f64,
    pub observed: f64,
    pub zeta_hat: f64,
    pub eigenvalue: f64,
}

pub fn compute(config: &BinaryConfig) -> CliResult<BinaryOutcome> {
    let ds = sample_binary(config)?;
    let prediction = predict_spike(config.ell, config.p as f64 / config.n as f64)?;
    let spectrum = top_spectrum(&ds.x, 1, config.seed)?;
    let v_hat = spectrum.eigenvector(0);
    Ok(BinaryOutcome {
        prediction,
        predicted: predicted_accuracy_binary(prediction.zeta)?,
        observed: observed_accuracy(v_hat, &ds.j)?,
        zeta_hat: zeta_hat(v_hat, &ds.j)?,
        eigenvalue: spectrum.eigenvalues[0],
    })
}
