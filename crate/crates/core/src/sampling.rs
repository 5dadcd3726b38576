//! Seeded random sources. Every randomized routine takes an explicit `u64`
//! seed and draws from a ChaCha8 stream, so results are reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in certificates so audits can tell sampler revisions apart.
pub const SAMPLER_VERSION: &str = "chacha8-rejection-v1";

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed for a named sub-task.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
