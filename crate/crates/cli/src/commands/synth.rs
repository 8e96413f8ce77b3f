use std::path::Path;

use serde::Serialize;
use serde_json::json;
use spikelab_core::eigen::{sign_align, SpectrumResult};
use spikelab_core::model::{sample_dataset, validate_assumptions, AssumptionReport, ModelConfig};
use spikelab_core::rmt::{predict_spike, MpLaw, SpikePrediction};
use spikelab_core::rng::derive_seed;
use spikelab_core::stats::{clt_report, empirical_alignment, esd_vs_mp, histogram, CltReport, KsResult, Moments};
use spikelab_core::Matrix;

use super::{dense_spectrum, load_model, top_spectrum};
use crate::args::SynthArgs;
use crate::error::CliResult;
use crate::output::{num, write_csv, write_text};
use crate::report::{RunReport, Timings};
use crate::svg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Full spectrum; required for the bulk comparison.
    Dense,
    /// Top-K pairs only.
    Lanczos,
}

#[derive(Clone, Copy, Debug)]
pub struct SynthOptions {
    pub subset: usize,
    pub solver: Solver,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { subset: 200, solver: Solver::Dense }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CltSummary {
    pub zeta_used: f64,
    pub subset_size: usize,
    pub moments: Moments,
    pub ks: KsResult,
}

impl From<&CltReport> for CltSummary {
    fn from(r: &CltReport) -> Self {
        CltSummary {
            zeta_used: r.zeta_used,
            subset_size: r.subset_indices.len(),
            moments: r.moments,
            ks: r.ks,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpikeComparison {
    pub index: usize,
    pub eigenvalue: f64,
    pub xi: f64,
    pub abs_position_error: f64,
    pub rel_position_error: f64,
    pub alignment: f64,
    pub zeta: f64,
    pub abs_alignment_error: f64,
    pub clt: Option<CltSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EsdComparison {
    pub excluded: usize,
    pub ks: KsResult,
    pub above_edge: usize,
}

#[derive(Clone, Debug)]
pub struct SynthOutcome {
    pub config: ModelConfig,
    pub law: MpLaw,
    pub predictions: Vec<SpikePrediction>,
    pub assumptions: AssumptionReport,
    pub spectrum: SpectrumResult,
    pub directions: Matrix,
    pub spikes: Vec<SpikeComparison>,
    pub clt: Vec<Option<CltReport>>,
    pub esd: Option<EsdComparison>,
}

impl SynthOutcome {
    pub fn theory_value(&self) -> serde_json::Value {
        json!({ "law": self.law, "spikes": self.predictions, "assumptions": self.assumptions })
    }

    pub fn empirics_value(&self) -> serde_json::Value {
        json!({
            "solver": self.spectrum.method,
            "top_eigenvalues": &self.spectrum.eigenvalues[..self.spikes.len().min(self.spectrum.eigenvalues.len())],
            "residual_norms": self.spectrum.residual_norms[..self.spikes.len()],
            "spikes": self.spikes,
            "esd": self.esd,
        })
    }
}

fn theory_block(cfg: &ModelConfig) -> CliResult<(MpLaw, Vec<SpikePrediction>, AssumptionReport, spikelab_core::model::SyntheticDataset)> {
    let ds = sample_dataset(cfg)?;
    let law = MpLaw::new(cfg.c())?;
    let ell = ds.theoretical_snrs()?;
    let predictions = ell.iter().map(|&l| predict_spike(l, cfg.c())).collect::<Result<Vec<_>, _>>()?;
    let assumptions = validate_assumptions(&ds, None)?;
    Ok((law, predictions, assumptions, ds))
}

/// Samples `cfg`, solves for the spectrum and compares it with theory.
pub fn compute(cfg: &ModelConfig, options: SynthOptions, timings: &mut Timings) -> CliResult<SynthOutcome> {
    let (law, predictions, assumptions, ds) = timings.time("sample", || theory_block(cfg))?;
    let k = cfg.k();
    let spectrum = timings.time("solve", || match options.solver {
        Solver::Dense => dense_spectrum(&ds.x),
        Solver::Lanczos => top_spectrum(&ds.x, k, cfg.seed),
    })?;
    let directions = ds.spike_directions()?;

    let mut spikes = Vec::with_capacity(k);
    let mut clt = Vec::with_capacity(k);
    for (i, pred) in predictions.iter().enumerate() {
        let v = directions.col(i);
        let v_hat = sign_align(spectrum.eigenvector(i), v);
        let lambda = spectrum.eigenvalues[i];
        let alignment = empirical_alignment(&v_hat, v)?;
        let report = if pred.detectable && options.subset >= spikelab_core::stats::MIN_KS_SAMPLE {
            Some(timings.time("clt", || clt_report(i, &v_hat, v, pred.zeta, options.subset.min(cfg.n), derive_seed(cfg.seed, i as u64), true))?)
        } else {
            None
        };
        spikes.push(SpikeComparison {
            index: i,
            eigenvalue: lambda,
            xi: pred.xi,
            abs_position_error: (lambda - pred.xi).abs(),
            rel_position_error: (lambda - pred.xi).abs() / pred.xi,
            alignment,
            zeta: pred.zeta,
            abs_alignment_error: (alignment - pred.zeta).abs(),
            clt: report.as_ref().map(CltSummary::from),
        });
        clt.push(report);
    }

    let esd = if options.solver == Solver::Dense {
        let excluded = predictions.iter().filter(|p| p.detectable).count();
        let ks = esd_vs_mp(&spectrum.eigenvalues, cfg.c(), excluded)?;
        let above_edge = spectrum.eigenvalues.iter().filter(|&&l| l > law.e_plus).count();
        Some(EsdComparison { excluded, ks, above_edge })
    } else {
        None
    };

    Ok(SynthOutcome {
        config: cfg.clone(),
        law,
        predictions,
        assumptions,
        spectrum,
        directions,
        spikes,
        clt,
        esd,
    })
}

/// Samples of the MP density on a grid for plotting.
pub fn mp_curve(law: &MpLaw, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
    (0..=points)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / points as f64;
            (x, law.density(x))
        })
        .collect()
}

/// Writes `esd.csv` and `esd.svg` (histogram, MP density, dashed markers).
pub fn write_esd_files(dir: &Path, eigenvalues: &[f64], law: &MpLaw, markers: &[f64], title: &str) -> CliResult<()> {
    write_csv(&dir.join("esd.csv"), &["index", "eigenvalue"], eigenvalues.iter().enumerate().map(|(i, &l)| vec![i.to_string(), num(l)]))?;
    let top = eigenvalues.iter().copied().fold(law.e_plus, f64::max);
    let hi = top * 1.05 + 0.05;
    // Zero eigenvalues (the atom when p < n) would swamp the bars.
    let nonzero: Vec<f64> = eigenvalues.iter().copied().filter(|l| l.abs() > 1e-9 * top).collect();
    let hist = histogram(&nonzero, 80, (0.0, hi))?;
    let scale = nonzero.len() as f64 / eigenvalues.len() as f64;
    // Bars are normalized over the non-zero eigenvalues; rescale the curve to match.
    let curve: Vec<(f64, f64)> = mp_curve(law, 0.0, hi, 600).into_iter().map(|(x, y)| (x, y / scale)).collect();
    write_text(&dir.join("esd.svg"), &svg::histogram_plot(&hist, &curve, markers, title, "eigenvalue"))
}

fn write_files(dir: &Path, out: &SynthOutcome) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    if out.esd.is_some() {
        let markers: Vec<f64> = out.predictions.iter().filter(|p| p.detectable).map(|p| p.xi).collect();
        write_esd_files(dir, &out.spectrum.eigenvalues, &out.law, &markers, "Eigenvalues of the Gram kernel")?;
    }
    for (i, spike) in out.spikes.iter().enumerate() {
        let v = out.directions.col(i);
        let v_hat = sign_align(out.spectrum.eigenvector(i), v);
        let sz = spike.zeta.sqrt();
        write_csv(
            &dir.join(format!("eigvec_{}.csv", i + 1)),
            &["index", "v_hat", "sqrt_zeta_v"],
            v_hat.iter().zip(v).enumerate().map(|(j, (a, b))| vec![j.to_string(), num(*a), num(sz * b)]),
        )?;
        let points: Vec<(f64, f64)> = v_hat.iter().enumerate().map(|(j, &a)| (j as f64, a)).collect();
        let reference: Vec<(f64, f64)> = v.iter().enumerate().map(|(j, &b)| (j as f64, sz * b)).collect();
        write_text(
            &dir.join(format!("eigvec_{}.svg", i + 1)),
            &svg::scatter_plot(&points, &reference, &format!("Eigenvector {} and its predicted mean", i + 1), "index", "entry"),
        )?;
        if let Some(r) = &out.clt[i] {
            write_csv(
                &dir.join(format!("residuals_{}.csv", i + 1)),
                &["index", "residual"],
                r.residuals.iter().enumerate().map(|(j, &x)| vec![j.to_string(), num(x)]),
            )?;
            let hist = histogram(&r.residuals, 40, (-4.0, 4.0))?;
            let curve: Vec<(f64, f64)> = (0..=200)
                .map(|t| {
                    let x = -4.0 + 8.0 * t as f64 / 200.0;
                    (x, spikelab_core::stats::gaussian_pdf(x))
                })
                .collect();
            write_text(
                &dir.join(format!("residuals_{}.svg", i + 1)),
                &svg::histogram_plot(&hist, &curve, &[], &format!("Normalized fluctuations, eigenvector {}", i + 1), "residual"),
            )?;
        }
    }
    Ok(())
}

pub fn run(args: &SynthArgs) -> CliResult<RunReport> {
    let cfg = load_model(&args.model)?;
    let mut report = RunReport::new("synth", json!({ "model": cfg, "subset": args.subset, "out": args.out }));
    let mut timings = Timings::default();
    let options = SynthOptions {
        subset: args.subset,
        solver: Solver::Dense,
    };
    let outcome = match compute(&cfg, options, &mut timings) {
        Ok(o) => o,
        Err(e) => {
            if let Ok((law, predictions, assumptions, _)) = theory_block(&cfg) {
                report.theory = json!({ "law": law, "spikes": predictions, "assumptions": assumptions });
            }
            report.timings = timings.into_map();
            let failed = report.failed(e.message());
            return Err(e.with_partial(failed));
        }
    };
    timings.time("write", || write_files(&args.out, &outcome))?;
    report.theory = outcome.theory_value();
    report.empirics = outcome.empirics_value();
    report.timings = timings.into_map();
    report.write(&args.out)?;

    println!("{:>6} {:>10} {:>10} {:>9} {:>10} {:>10}", "spike", "lambda", "xi", "rel.err", "align", "zeta");
    for s in &outcome.spikes {
        println!(
            "{:>6} {:>10.4} {:>10.4} {:>9.4} {:>10.4} {:>10.4}",
            s.index + 1,
            s.eigenvalue,
            s.xi,
            s.rel_position_error,
            s.alignment,
            s.zeta
        );
    }
    if let Some(e) = &outcome.esd {
        println!("bulk vs MP: D = {:.4} ({} top eigenvalues excluded)", e.ks.statistic, e.excluded);
    }
    println!("wrote {}", args.out.display());
    Ok(report)
}
