//! Seeded random streams.
//!
//! Every sampling site draws from its own ChaCha stream keyed by
//! `(seed, purpose)`, so no generator state is ever shared between call
//! sites and adding a new consumer never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const MEANS: &str = "means";
pub const NOISE: &str = "noise";
pub const PERMUTATION: &str = "permutation";
pub const LANCZOS_START: &str = "lanczos-start";
pub const CLT_SUBSET: &str = "clt-subset";

/// Independent generator for one purpose under one seed.
pub fn stream(seed: u64, purpose: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(purpose.as_bytes()));
    rng
}

/// Child seed for the `index`-th replicate of a run (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fill_standard_normal(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for x in out {
        *x = StandardNormal.sample(rng);
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
