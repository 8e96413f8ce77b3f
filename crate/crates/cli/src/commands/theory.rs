use serde::Serialize;
use serde_json::json;
use spikelab_core::rmt::{predict_spike, predicted_accuracy_binary, MpLaw, SpikePrediction};

use crate::args::TheoryArgs;
use crate::error::{CliError, CliResult};
use crate::report::{to_value, RunReport};

#[derive(Clone, Debug, Serialize)]
pub struct TheorySpike {
    #[serde(flatten)]
    pub prediction: SpikePrediction,
    pub predicted_accuracy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryResult {
    pub law: MpLaw,
    pub spikes: Vec<TheorySpike>,
}

pub fn compute(ells: &[f64], c: f64) -> CliResult<TheoryResult> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(CliError::Usage(format!("--c must be positive, got {c}")));
    }
    if ells.is_empty() {
        return Err(CliError::Usage("--ell needs at least one value".into()));
    }
    let law = MpLaw::new(c)?;
    let spikes = ells
        .iter()
        .map(|&ell| {
            if !(ell > 0.0 && ell.is_finite()) {
                return Err(CliError::Usage(format!("--ell values must be positive, got {ell}")));
            }
            let prediction = predict_spike(ell, c)?;
            Ok(TheorySpike {
                prediction,
                predicted_accuracy: predicted_accuracy_binary(prediction.zeta)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(TheoryResult { law, spikes })
}

pub fn run(args: &TheoryArgs) -> CliResult<RunReport> {
    let result = compute(&args.ell, args.c)?;
    let mut report = RunReport::new("theory", json!({ "ell": args.ell, "c": args.c }));
    report.theory = to_value(&result);
    report.empirics = json!({});

    println!("E- = {:.6}  E+ = {:.6}  atom = {:.6}", result.law.e_minus, result.law.e_plus, result.law.atom_mass);
    println!("{:>10} {:>10} {:>10} {:>10} {:>10}", "ell", "detect", "xi", "zeta", "accuracy");
    for s in &result.spikes {
        let p = &s.prediction;
        println!("{:>10.4} {:>10} {:>10.4} {:>10.5} {:>10.4}", p.ell, p.detectable, p.xi, p.zeta, s.predicted_accuracy);
    }
    if let Some(dir) = &args.out {
        report.write(dir)?;
    }
    Ok(report)
}
