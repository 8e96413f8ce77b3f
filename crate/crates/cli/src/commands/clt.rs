use std::path::Path;

use serde::Serialize;
use serde_json::json;
use spikelab_core::eigen::sign_align;
use spikelab_core::model::{sample_dataset, ModelConfig};
use spikelab_core::rmt::{predict_spike, SpikePrediction};
use spikelab_core::rng::derive_seed;
use spikelab_core::stats::{clt_report, gaussian_pdf, histogram, moments, Moments};

use super::{load_model, top_spectrum};
use crate::args::CltArgs;
use crate::error::{CliError, CliResult};
use crate::output::{num, write_csv, write_text};
use crate::report::{RunReport, Timings};
use crate::svg;

#[derive(Clone, Copy, Debug)]
pub struct CltOptions {
    pub seeds: usize,
    pub subset: usize,
    pub alpha: f64,
    pub sanity_flip: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub rejected: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpikeClt {
    pub index: usize,
    pub prediction: SpikePrediction,
    pub rejections: usize,
    pub trials: usize,
    pub per_seed: Vec<SeedResult>,
    /// Moments of all residual entries pooled over seeds.
    pub pooled: Moments,
    #[serde(skip)]
    pub pooled_residuals: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CltOutcome {
    pub spikes: Vec<SpikeClt>,
}

/// For each derived seed: sample, take the top-K eigenvectors, align them
/// with the signal directions, normalize with the predicted alignment and
/// KS-test a random subset of entries against `N(0, 1)`.
pub fn compute(base: &ModelConfig, options: CltOptions, timings: &mut Timings) -> CliResult<CltOutcome> {
    if options.seeds == 0 {
        return Err(CliError::Usage("--seeds must be positive".into()));
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {}", options.alpha)));
    }
    if options.subset < spikelab_core::stats::MIN_KS_SAMPLE || options.subset > base.n {
        return Err(CliError::Usage(format!("--subset must lie in [{}, n = {}]", spikelab_core::stats::MIN_KS_SAMPLE, base.n)));
    }
    let first = sample_dataset(base)?;
    let predictions = first
        .theoretical_snrs()?
        .iter()
        .map(|&l| predict_spike(l, base.c()))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some((i, p)) = predictions.iter().enumerate().find(|(_, p)| !p.detectable) {
        return Err(CliError::Usage(format!(
            "spike {} (ell = {:.4}) is below the detection threshold sqrt(c) = {:.4}; its fluctuations are not covered",
            i + 1,
            p.ell,
            base.c().sqrt()
        )));
    }

    let k = base.k();
    let mut per_spike: Vec<(Vec<SeedResult>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); k];
    for s in 0..options.seeds {
        let mut cfg = base.clone();
        cfg.seed = derive_seed(base.seed, s as u64);
        let ds = timings.time("sample", || sample_dataset(&cfg))?;
        let spectrum = timings.time("solve", || top_spectrum(&ds.x, k, cfg.seed))?;
        let dirs = ds.spike_directions()?;
        for (i, pred) in predictions.iter().enumerate() {
            let v = dirs.col(i);
            let mut v_hat = sign_align(spectrum.eigenvector(i), v);
            if options.sanity_flip {
                v_hat.iter_mut().for_each(|x| *x = -*x);
            }
            let r = clt_report(i, &v_hat, v, pred.zeta, options.subset, derive_seed(cfg.seed, i as u64), !options.sanity_flip)?;
            per_spike[i].0.push(SeedResult {
                seed: cfg.seed,
                ks_statistic: r.ks.statistic,
                p_value: r.ks.p_value,
                rejected: r.ks.p_value < options.alpha,
            });
            per_spike[i].1.extend(&r.residuals);
        }
    }

    let spikes = per_spike
        .into_iter()
        .zip(&predictions)
        .enumerate()
        .map(|(i, ((per_seed, pooled_residuals), pred))| {
            Ok(SpikeClt {
                index: i,
                prediction: *pred,
                rejections: per_seed.iter().filter(|r| r.rejected).count(),
                trials: per_seed.len(),
                per_seed,
                pooled: moments(&pooled_residuals)?,
                pooled_residuals,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(CltOutcome { spikes })
}

fn write_files(dir: &Path, out: &CltOutcome) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    for s in &out.spikes {
        write_csv(
            &dir.join(format!("ks_{}.csv", s.index + 1)),
            &["seed", "ks_statistic", "p_value", "rejected"],
            s.per_seed.iter().map(|r| vec![r.seed.to_string(), num(r.ks_statistic), num(r.p_value), r.rejected.to_string()]),
        )?;
        let hist = histogram(&s.pooled_residuals, 60, (-4.5, 4.5))?;
        let curve: Vec<(f64, f64)> = (0..=300).map(|t| -4.5 + 9.0 * t as f64 / 300.0).map(|x| (x, gaussian_pdf(x))).collect();
        write_text(
            &dir.join(format!("residuals_{}.svg", s.index + 1)),
            &svg::histogram_plot(&hist, &curve, &[], &format!("Pooled normalized fluctuations, eigenvector {}", s.index + 1), "residual"),
        )?;
    }
    Ok(())
}

pub fn run(args: &CltArgs) -> CliResult<RunReport> {
    let cfg = load_model(&args.model)?;
    let options = CltOptions {
        seeds: args.seeds,
        subset: args.subset,
        alpha: args.alpha,
        sanity_flip: args.sanity_flip,
    };
    let mut report = RunReport::new(
        "clt",
        json!({ "model": cfg, "seeds": args.seeds, "subset": args.subset, "alpha": args.alpha, "sanity_flip": args.sanity_flip, "out": args.out }),
    );
    let mut timings = Timings::default();
    let outcome = compute(&cfg, options, &mut timings).map_err(|e| {
        let failed = report.clone().failed(e.message());
        e.with_partial(failed)
    })?;
    timings.time("write", || write_files(&args.out, &outcome))?;
    report.theory = json!({
        "spikes": outcome.spikes.iter().map(|s| s.prediction).collect::<Vec<_>>(),
        "residual_law": { "mean": 0.0, "variance": 1.0, "skewness": 0.0, "excess_kurtosis": 0.0 },
    });
    report.empirics = json!({ "spikes": outcome.spikes });
    report.timings = timings.into_map();
    report.write(&args.out)?;

    println!("{:>6} {:>8} {:>11} {:>10} {:>10}", "spike", "zeta", "rejections", "mean", "variance");
    for s in &outcome.spikes {
        println!(
            "{:>6} {:>8.4} {:>8}/{:<2} {:>10.4} {:>10.4}",
            s.index + 1,
            s.prediction.zeta,
            s.rejections,
            s.trials,
            s.pooled.mean,
            s.pooled.variance
        );
    }
    println!("wrote {}", args.out.display());
    Ok(report)
}
