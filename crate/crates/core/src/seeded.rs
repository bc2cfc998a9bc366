//! Deterministic randomness helpers.
//!
//! Two flavors are used in the crate: coordinate-addressed coins (a keyed
//! 64-bit mixer, so a value depends only on the key and never on evaluation
//! order) and ordinary seeded streams for sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Finalizer from the splitmix64 generator; a good 64-bit mixer.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with a domain tag so independent uses of one seed do not
/// share a stream.
pub fn mix(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

/// Uniform value in `[0, 1)` from 53 high bits of a mixed word.
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0f64 / (1u64 << 53) as f64)
}

/// Seeded stream RNG for sampling tasks (net pools, audits, Monte Carlo).
pub fn stream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, tag))
}
