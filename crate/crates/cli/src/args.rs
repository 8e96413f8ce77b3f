use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "spikelab", version, about = "Spectra of spiked Gram kernels: theory, simulation and Fashion-MNIST accuracy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bulk edges, spike positions, alignments and predicted accuracies.
    Theory(TheoryArgs),
    /// Sample a synthetic dataset and compare its spectrum with theory.
    Synth(SynthArgs),
    /// Test the Gaussian fluctuations of spike eigenvector entries over many seeds.
    Clt(CltArgs),
    /// Full spectrum of a kernel against the Marčenko-Pastur law.
    Esd(EsdArgs),
    /// Two-class spectral clustering accuracy on Fashion-MNIST pairs.
    ///
    /// Expects the four uncompressed IDX files (run `gunzip -k` on the
    /// distributed `.gz` files first).
    Fmnist(FmnistArgs),
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Comma-separated signal strengths.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub ell: Vec<f64>,
    /// Dimension ratio p / n.
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
    /// Directory for report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// JSON model config (keys: p, n, class_sizes, mean_norms, noise_std, seed).
    /// Without it, three classes (333, 334, 333) with mean norms (3, 4, 5),
    /// n = 1000 and p = 2000 are used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "out/synth")]
    pub out: PathBuf,
    /// Entries per KS subset.
    #[arg(long, default_value_t = 200)]
    pub subset: usize,
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "out/clt")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    #[arg(long, default_value_t = 200)]
    pub subset: usize,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// Flip each eigenvector and skip sign alignment (the test should then reject).
    #[arg(long)]
    pub sanity_flip: bool,
}

#[derive(Debug, Args)]
pub struct EsdArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Pure Gaussian noise instead of a model config.
    #[arg(long, conflicts_with = "config")]
    pub pure_noise: bool,
    /// Sample count for --pure-noise.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Feature dimension for --pure-noise.
    #[arg(long, default_value_t = 2000)]
    pub p: usize,
    /// Largest eigenvalues left out of the comparison (default: number of detectable spikes).
    #[arg(long)]
    pub exclude: Option<usize>,
    #[arg(long, default_value = "out/esd")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FmnistArgs {
    /// Directory holding the four uncompressed IDX files
    /// (default: $SPIKELAB_FMNIST_DIR, else ./data/fashion-mnist).
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Explicit image files (train, test); overrides --data-dir.
    #[arg(long, num_args = 1.., requires = "labels")]
    pub images: Vec<PathBuf>,
    /// Explicit label files matching --images.
    #[arg(long, num_args = 1.., requires = "images")]
    pub labels: Vec<PathBuf>,
    /// `all` or `k1,k2[;k1,k2...]` with class ids 0-9.
    #[arg(long, default_value = "all")]
    pub pairs: String,
    #[arg(long, overrides_with = "no_center")]
    pub center: bool,
    #[arg(long, overrides_with = "center")]
    pub no_center: bool,
    #[arg(long, overrides_with = "no_scale")]
    pub scale: bool,
    #[arg(long, overrides_with = "scale")]
    pub no_scale: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out/fmnist")]
    pub out: PathBuf,
}

impl FmnistArgs {
    pub fn center_enabled(&self) -> bool {
        !self.no_center
    }

    pub fn scale_enabled(&self) -> bool {
        !self.no_scale
    }
}
