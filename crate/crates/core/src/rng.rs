//! Seed derivation.
//!
//! Every random quantity in an experiment is drawn from its own ChaCha
//! stream whose key is derived from the top-level seed plus a path of
//! integers (trial id, purpose, attempt, ...). Results therefore do not
//! depend on the order in which trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes used when deriving per-trial seeds.
pub mod purpose {
    pub const LABEL: u64 = 1;
    pub const LATENTS: u64 = 2;
    pub const EDGES: u64 = 3;
    pub const PERTURB: u64 = 4;
    pub const RESTART: u64 = 5;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of `(seed, path[0], path[1], ...)`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    rng_from_seed(derive_seed(seed, path))
}
