//! Named random sub-streams derived from one root seed.
//!
//! Every stochastic component takes its generator from `stream(root, tag, index)`,
//! so any sub-result can be reproduced without replaying the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SPLIT: u64 = 0x5350_4c49;
pub const FOREST: u64 = 0x464f_5245;
pub const POLICY: u64 = 0x504f_4c49;
pub const GENERATOR: u64 = 0x4745_4e45;
pub const NODE: u64 = 0x4e4f_4445;
pub const TREE: u64 = 0x5452_4545;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `(root, tag, index)`.
pub fn derive(root: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(root ^ splitmix64(tag)).wrapping_add(index))
}

pub fn stream(root: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(root, tag, index))
}
