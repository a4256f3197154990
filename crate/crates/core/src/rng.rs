//! Random streams for simulation.
//!
//! Every stream is a ChaCha8 generator (`rand_chacha::ChaCha8Rng`) seeded from
//! a 64-bit value via `SeedableRng::seed_from_u64`. Gaussian variates use the
//! ziggurat sampler of `rand_distr::StandardNormal`. Both are portable and
//! produce identical sequences on every platform for a given crate version.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

/// Seeded source of standard normal variates.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_std(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed for a Monte Carlo probe.
///
/// `derive_seed(master, n, N, i)` folds the four words through SplitMix64:
/// `h = sm(master); h = sm(h ^ n); h = sm(h ^ N); h = sm(h ^ i)`. Distinct
/// horizons therefore never share noise realizations.
pub fn derive_seed(master: u64, dim: u64, horizon: u64, trial: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ dim);
    h = splitmix64(h ^ horizon);
    splitmix64(h ^ trial)
}
