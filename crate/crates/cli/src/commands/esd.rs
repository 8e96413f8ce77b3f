use serde::Serialize;
use serde_json::json;
use spikelab_core::model::{sample_dataset, ModelConfig};
use spikelab_core::rmt::{predict_spike, MpLaw};
use spikelab_core::rng;
use spikelab_core::stats::{esd_vs_mp, KsResult};
use spikelab_core::Matrix;

use super::synth::write_esd_files;
use super::{check_dense_cap, dense_spectrum, load_model};
use crate::args::EsdArgs;
use crate::error::{CliError, CliResult};
use crate::report::{RunReport, Timings};

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EsdSource {
    PureNoise { n: usize, p: usize, seed: u64 },
    Model { config: ModelConfig },
}

#[derive(Clone, Debug, Serialize)]
pub struct EsdOutcome {
    pub law: MpLaw,
    /// Predicted outlier positions of the detectable spikes (empty for pure noise).
    pub spike_positions: Vec<f64>,
    pub excluded: usize,
    pub ks: KsResult,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Bulk maximum, i.e. the largest eigenvalue after the excluded ones.
    pub max_bulk_eigenvalue: f64,
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
}

pub fn pure_noise(n: usize, p: usize, seed: u64) -> CliResult<Matrix> {
    if n == 0 || p == 0 {
        return Err(CliError::Usage(format!("--n and --p must be positive, got n = {n}, p = {p}")));
    }
    let mut x = Matrix::zeros(p, n);
    rng::fill_standard_normal(&mut rng::stream(seed, rng::NOISE), x.as_mut_slice());
    Ok(x)
}

/// Dense spectrum of the kernel and its distance to the Marčenko-Pastur law.
pub fn compute(source: &EsdSource, exclude: Option<usize>, timings: &mut Timings) -> CliResult<EsdOutcome> {
    let (x, c, spike_positions) = match source {
        EsdSource::PureNoise { n, p, seed } => {
            check_dense_cap(*n)?;
            (timings.time("sample", || pure_noise(*n, *p, *seed))?, *p as f64 / *n as f64, Vec::new())
        }
        EsdSource::Model { config } => {
            check_dense_cap(config.n)?;
            let ds = timings.time("sample", || sample_dataset(config))?;
            let positions = ds
                .theoretical_snrs()?
                .iter()
                .map(|&l| predict_spike(l, config.c()))
                .filter_map(|p| p.ok().filter(|p| p.detectable).map(|p| p.xi))
                .collect();
            (ds.x, config.c(), positions)
        }
    };
    let spectrum = timings.time("solve", || dense_spectrum(&x))?;
    let excluded = exclude.unwrap_or(spike_positions.len());
    let ev = spectrum.eigenvalues;
    if excluded >= ev.len() {
        return Err(CliError::Usage(format!("--exclude {excluded} leaves no eigenvalues out of {}", ev.len())));
    }
    let ks = esd_vs_mp(&ev, c, excluded)?;
    Ok(EsdOutcome {
        law: MpLaw::new(c)?,
        spike_positions,
        excluded,
        ks,
        min_eigenvalue: *ev.last().expect("non-empty spectrum"),
        max_eigenvalue: ev[0],
        max_bulk_eigenvalue: ev[excluded],
        eigenvalues: ev,
    })
}

pub fn run(args: &EsdArgs) -> CliResult<RunReport> {
    let source = if args.pure_noise {
        EsdSource::PureNoise {
            n: args.n,
            p: args.p,
            seed: args.model.seed.unwrap_or(0),
        }
    } else {
        EsdSource::Model {
            config: load_model(&args.model)?,
        }
    };
    let mut report = RunReport::new("esd", json!({ "source": source, "exclude": args.exclude, "out": args.out }));
    let mut timings = Timings::default();
    let outcome = compute(&source, args.exclude, &mut timings).map_err(|e| {
        let failed = report.clone().failed(e.message());
        e.with_partial(failed)
    })?;
    std::fs::create_dir_all(&args.out)?;
    timings.time("write", || write_esd_files(&args.out, &outcome.eigenvalues, &outcome.law, &outcome.spike_positions, "Eigenvalues of the Gram kernel"))?;
    report.theory = json!({ "law": outcome.law, "spike_positions": outcome.spike_positions });
    report.empirics = json!({
        "excluded": outcome.excluded,
        "ks": outcome.ks,
        "min_eigenvalue": outcome.min_eigenvalue,
        "max_eigenvalue": outcome.max_eigenvalue,
        "max_bulk_eigenvalue": outcome.max_bulk_eigenvalue,
    });
    report.timings = timings.into_map();
    report.write(&args.out)?;
    println!(
        "E+ = {:.4}, largest eigenvalue {:.4}, D = {:.4} ({} excluded)",
        outcome.law.e_plus, outcome.max_eigenvalue, outcome.ks.statistic, outcome.excluded
    );
    println!("wrote {}", args.out.display());
    Ok(report)
}
