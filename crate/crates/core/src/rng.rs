//! Named, reproducible random sub-streams derived from a single seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels so that components can be varied independently.
pub mod label {
    pub const DOMAIN: u64 = 0x646f_6d61_696e;
    pub const INIT: u64 = 0x696e_6974;
    pub const QUERIES: u64 = 0x7175_6572_7973;
    pub const SOLVER: u64 = 0x736f_6c76_6572;
    pub const TRAIN: u64 = 0x74_7261_696e;
    pub const DATA: u64 = 0x6461_7461;
}

/// SplitMix64 finalizer.
pub fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives a child seed from a parent seed and a path of labels or indices.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

pub fn stream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, path))
}
