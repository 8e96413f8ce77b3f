pub mod binary;
pub mod clt;
pub mod esd;
pub mod fmnist;
pub mod synth;
pub mod theory;

use spikelab_core::eigen::{dense_symmetric_eigen, gram_matrix, GramOperator, LanczosOptions, SpectrumResult};
use spikelab_core::model::ModelConfig;
use spikelab_core::Matrix;

use crate::args::ModelArgs;
use crate::error::{CliError, CliResult};

/// Largest `n` for which the full dense spectrum is computed.
pub const DENSE_CAP: usize = 4000;

/// Lanczos settings used by the commands: tight residuals, and enough
/// Krylov room for top eigenvalues that sit close to the bulk edge.
pub const LANCZOS_TOL: f64 = 1e-10;
pub const LANCZOS_MAX_ITER: usize = 800;

pub fn load_model(args: &ModelArgs) -> CliResult<ModelConfig> {
    let mut cfg = match &args.config {
        Some(path) => ModelConfig::load(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        None => ModelConfig::three_class_default(0),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn check_dense_cap(n: usize) -> CliResult<()> {
    if n > DENSE_CAP {
        return Err(CliError::Usage(format!(
            "n = {n} exceeds the dense-solver cap of {DENSE_CAP}; the full spectrum is only available densely (Lanczos computes top-k pairs only)"
        )));
    }
    Ok(())
}

/// All eigenpairs of `(1/p) X^T X`, eigenvalues non-increasing.
pub fn dense_spectrum(x: &Matrix) -> CliResult<SpectrumResult> {
    check_dense_cap(x.cols())?;
    Ok(dense_symmetric_eigen(&gram_matrix(x)?)?)
}

/// Top-`k` eigenpairs of `(1/p) X^T X` without forming the kernel.
pub fn top_spectrum(x: &Matrix, k: usize, seed: u64) -> CliResult<SpectrumResult> {
    let op = GramOperator::new(x)?;
    Ok(LanczosOptions::new(k, seed).with_tol(LANCZOS_TOL).with_max_iter(LANCZOS_MAX_ITER).solve(&op)?)
}
