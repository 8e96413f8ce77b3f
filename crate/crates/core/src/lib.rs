//! Spiked *signal + noise* Gram kernels.
//!
//! The crate samples the model `X = M J^T + W` (cluster means `M`, one-hot
//! memberships `J`, i.i.d. Gaussian noise `W`), extracts the spectrum of the
//! Gram kernel `K = (1/p) X^T X`, and compares it with closed-form
//! random-matrix predictions: the Marčenko-Pastur bulk, the position and
//! alignment of isolated spikes, and the Gaussian law of spike eigenvector
//! entries that drives the accuracy of spectral clustering.
//!
//! Module map:
//!
//! - [`model`]: configuration, sampling and assumption diagnostics.
//! - [`eigen`]: Gram operator, dense (Jacobi / tridiagonal QL) and Lanczos
//!   solvers, sign alignment and tangent-normal decomposition.
//! - [`rmt`]: bulk law, spike position/alignment, fluctuation parameters and
//!   accuracy predictions.
//! - [`stats`]: Gaussian CDF, KS test, moments, histograms, residuals and
//!   accuracy measurement.
//! - [`ingest`]: IDX (Fashion-MNIST) readers and the two-class data matrix.

pub mod eigen;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod rmt;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::Matrix;
