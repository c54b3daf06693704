//! Seed derivation for parallel random streams.
//!
//! Replications and worker threads each get their own ChaCha8 generator,
//! keyed by `(base_seed, stream)` and expanded through SplitMix64. Distinct
//! stream indices yield statistically independent generators without any
//! shared state, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e3779b97f4a7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives the ChaCha8 generator for one stream of a seeded run.
pub fn derive_rng(base_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = base_seed ^ stream.wrapping_mul(GOLDEN).rotate_left(17);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Derives a child seed for one stream, with the same mixing as
/// [`derive_rng`]. Used to give every point of a parameter sweep its own
/// base seed.
pub fn derive_seed(base_seed: u64, stream: u64) -> u64 {
    let mut state = base_seed ^ stream.wrapping_mul(GOLDEN).rotate_left(17);
    splitmix64(&mut state)
}
