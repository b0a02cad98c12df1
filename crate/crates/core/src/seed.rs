//! Deterministic per-realization seeding.
//!
//! Every realization draws from its own ChaCha8 stream whose seed is derived
//! from the master seed and a list of stream coordinates (system size,
//! realization index, ...). The derivation folds each coordinate into the
//! state with the SplitMix64 finalizer, so the stream for realization `r`
//! never depends on which worker evaluated it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `coords` into `master`: `s ← mix64(s + GOLDEN ⊕ c)` per coordinate.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(mix64(master), |s, &c| {
        mix64(s.wrapping_add(GOLDEN) ^ mix64(c.wrapping_add(GOLDEN)))
    })
}

pub fn stream(master: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, coords))
}
