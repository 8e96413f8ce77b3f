use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use spikelab_core::ingest::{read_idx_images, read_idx_labels, select_pair, IdxImages, FASHION_MNIST_CLASSES, FASHION_MNIST_FILES};
use spikelab_core::rng::derive_seed;
use spikelab_core::stats::{accuracy_report, AccuracyReport};

use super::top_spectrum;
use crate::args::FmnistArgs;
use crate::error::{CliError, CliResult};
use crate::output::{num, write_csv, write_text};
use crate::report::{RunReport, Timings};
use crate::svg;

pub const DATA_DIR_ENV: &str = "SPIKELAB_FMNIST_DIR";
const NUM_CLASSES: u8 = 10;

/// Image and label files, read in order and concatenated.
#[derive(Clone, Debug, Serialize)]
pub struct DataFiles {
    pub images: Vec<PathBuf>,
    pub labels: Vec<PathBuf>,
}

impl DataFiles {
    /// The training and test splits inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        DataFiles {
            images: FASHION_MNIST_FILES.iter().map(|(i, _)| dir.join(i)).collect(),
            labels: FASHION_MNIST_FILES.iter().map(|(_, l)| dir.join(l)).collect(),
        }
    }

    pub fn from_args(args: &FmnistArgs) -> Self {
        if !args.images.is_empty() {
            return DataFiles {
                images: args.images.clone(),
                labels: args.labels.clone(),
            };
        }
        let dir = args
            .data_dir
            .clone()
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("data/fashion-mnist"));
        Self::in_dir(&dir)
    }

    pub fn load(&self) -> CliResult<(Vec<IdxImages>, Vec<Vec<u8>>)> {
        if self.images.len() != self.labels.len() {
            return Err(CliError::Usage(format!("{} image files but {} label files", self.images.len(), self.labels.len())));
        }
        let read_err = |p: &Path, e: spikelab_core::Error| CliError::Usage(format!("{}: {e}", p.display()));
        let images = self.images.iter().map(|p| read_idx_images(p).map_err(|e| read_err(p, e))).collect::<CliResult<Vec<_>>>()?;
        let labels = self.labels.iter().map(|p| read_idx_labels(p).map_err(|e| read_err(p, e))).collect::<CliResult<Vec<_>>>()?;
        Ok((images, labels))
    }
}

/// `all` or `k1,k2;k1,k2;...`; pairs are normalized to `k1 < k2`.
pub fn parse_pairs(spec: &str) -> CliResult<Vec<(u8, u8)>> {
    if spec.trim() == "all" {
        return Ok((0..NUM_CLASSES).flat_map(|a| (a + 1..NUM_CLASSES).map(move |b| (a, b))).collect());
    }
    let bad = || CliError::Usage(format!("--pairs expects `all` or `k1,k2[;k1,k2...]` with ids 0-9, got `{spec}`"));
    let mut pairs = Vec::new();
    for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item.split_once(',').ok_or_else(bad)?;
        let a: u8 = a.trim().parse().map_err(|_| bad())?;
        let b: u8 = b.trim().parse().map_err(|_| bad())?;
        if a >= NUM_CLASSES || b >= NUM_CLASSES || a == b {
            return Err(bad());
        }
        let pair = (a.min(b), a.max(b));
        if !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    if pairs.is_empty() {
        return Err(bad());
    }
    Ok(pairs)
}

#[derive(Clone, Copy, Debug)]
pub struct FmnistOptions {
    pub center: bool,
    pub scale: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairResult {
    pub names: (String, String),
    #[serde(flatten)]
    pub accuracy: AccuracyReport,
    pub eigenvalue: f64,
    pub residual_norm: f64,
}

/// Spectral two-class accuracy for each pair: build the data matrix,
/// preprocess, take the dominant kernel eigenvector, and compare observed
/// and predicted accuracy. Pairs run in parallel; each derives its own
/// solver seed so the result does not depend on scheduling.
pub fn compute(images: &[IdxImages], labels: &[Vec<u8>], pairs: &[(u8, u8)], options: FmnistOptions) -> CliResult<Vec<PairResult>> {
    pairs
        .par_iter()
        .map(|&(k1, k2)| {
            let mut ds = select_pair(images, labels, k1, k2)?;
            ds.preprocess(options.center, options.scale)?;
            let spectrum = top_spectrum(&ds.x, 1, derive_seed(options.seed, (k1 as u64) * 10 + k2 as u64))?;
            let accuracy = accuracy_report(spectrum.eigenvector(0), &ds.j, (k1 as usize, k2 as usize))?;
            Ok(PairResult {
                names: (class_name(k1), class_name(k2)),
                accuracy,
                eigenvalue: spectrum.eigenvalues[0],
                residual_norm: spectrum.residual_norms[0],
            })
        })
        .collect()
}

fn class_name(k: u8) -> String {
    FASHION_MNIST_CLASSES.get(k as usize).map_or_else(|| k.to_string(), |s| s.to_string())
}

/// 10 x 10 layout: observed accuracy above the diagonal, predicted below.
pub fn accuracy_matrix(results: &[PairResult]) -> Vec<Vec<Option<f64>>> {
    let mut m = vec![vec![None; NUM_CLASSES as usize]; NUM_CLASSES as usize];
    for r in results {
        let (a, b) = r.accuracy.pair;
        let (lo, hi) = (a.min(b), a.max(b));
        m[lo][hi] = Some(r.accuracy.observed);
        m[hi][lo] = Some(r.accuracy.predicted);
    }
    m
}

fn write_files(dir: &Path, results: &[PairResult]) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    write_csv(
        &dir.join("accuracy.csv"),
        &["k1", "k2", "class1", "class2", "n", "zeta_hat", "observed", "predicted", "eigenvalue"],
        results.iter().map(|r| {
            vec![
                r.accuracy.pair.0.to_string(),
                r.accuracy.pair.1.to_string(),
                r.names.0.clone(),
                r.names.1.clone(),
                r.accuracy.n.to_string(),
                num(r.accuracy.zeta_hat),
                num(r.accuracy.observed),
                num(r.accuracy.predicted),
                num(r.eigenvalue),
            ]
        }),
    )?;
    let m = accuracy_matrix(results);
    let mut header = vec!["class"];
    header.extend(FASHION_MNIST_CLASSES);
    write_csv(
        &dir.join("accuracy_matrix.csv"),
        &header,
        m.iter().enumerate().map(|(i, row)| {
            std::iter::once(FASHION_MNIST_CLASSES[i].to_string())
                .chain(row.iter().map(|v| v.map_or_else(String::new, |x| format!("{x:.4}"))))
                .collect()
        }),
    )?;
    write_text(
        &dir.join("accuracy_matrix.svg"),
        &svg::heatmap(&m, &FASHION_MNIST_CLASSES, "Observed (upper right) and predicted (lower left) accuracy"),
    )
}

pub fn run(args: &FmnistArgs) -> CliResult<RunReport> {
    let files = DataFiles::from_args(args);
    let pairs = parse_pairs(&args.pairs)?;
    let options = FmnistOptions {
        center: args.center_enabled(),
        scale: args.scale_enabled(),
        seed: args.seed,
    };
    let mut report = RunReport::new(
        "fmnist",
        json!({
            "files": files,
            "pairs": pairs,
            "center": options.center,
            "scale": options.scale,
            "pixel_divisor": 255.0,
            "seed": options.seed,
            "out": args.out,
        }),
    );
    let mut timings = Timings::default();
    let (images, labels) = timings.time("load", || files.load())?;
    let results = timings.time("pairs", || compute(&images, &labels, &pairs, options)).map_err(|e| {
        let failed = report.clone().failed(e.message());
        e.with_partial(failed)
    })?;
    timings.time("write", || write_files(&args.out, &results))?;
    report.theory = json!({
        "predicted": results.iter().map(|r| json!({ "pair": r.accuracy.pair, "zeta_hat": r.accuracy.zeta_hat, "predicted": r.accuracy.predicted })).collect::<Vec<_>>(),
    });
    report.empirics = json!({ "pairs": results });
    report.timings = timings.into_map();
    report.write(&args.out)?;

    println!("{:<28} {:>7} {:>9} {:>9} {:>9}", "pair", "n", "zeta_hat", "observed", "predicted");
    for r in &results {
        println!(
            "{:<28} {:>7} {:>9.4} {:>9.4} {:>9.4}",
            format!("{} / {}", r.names.0, r.names.1),
            r.accuracy.n,
            r.accuracy.zeta_hat,
            r.accuracy.observed,
            r.accuracy.predicted
        );
    }
    println!("wrote {}", args.out.display());
    Ok(report)
}
