//! Counter-based seed derivation.
//!
//! Every random stream is keyed by a path of integers (base seed, protocol,
//! noise model, replication, run) so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// One SplitMix64 output step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a key path into a seed: `s <- splitmix64(s ^ splitmix64(k))` for each key.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |s, &k| splitmix64(s ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019))))
}

/// FNV-1a hash of a label, for putting names into a key path.
pub fn label_key(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub fn stream(base: u64, path: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}
