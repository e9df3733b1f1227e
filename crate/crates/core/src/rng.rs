//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator whose seed is
//! derived from a user seed plus a list of integer keys (tree index, feature
//! index, repetition, ...). Streams are therefore independent of the order in
//! which parallel jobs run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name of the generator recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3), splitmix64 key derivation";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a 64-bit key from a seed and a path of sub-keys.
pub fn derive(seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(seed), |acc, &k| splitmix64(acc ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn stream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let base = derive(seed, keys);
    let mut bytes = [0u8; 32];
    let mut state = base;
    for chunk in bytes.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

// Domain tags keep streams for different purposes apart.
pub(crate) const TAG_SIMULATE: u64 = 1;
pub(crate) const TAG_TREE: u64 = 2;
pub(crate) const TAG_FOLDS: u64 = 3;
pub(crate) const TAG_PERMUTE: u64 = 4;
