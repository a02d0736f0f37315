//! Deterministic named random streams.
//!
//! All randomness in an experiment flows from a single 64-bit root seed.
//! Independent consumers (realizations, atom draws, path samplers) pull
//! from named streams derived from the root, so work items can be
//! distributed across threads in any order without changing results.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

/// Derives the stream seed for `name` under a root seed.
///
/// FNV-1a over the name bytes, then two SplitMix64 rounds to decorrelate
/// from the root. Stable across platforms and releases; not cryptographic.
pub fn stream_seed(root: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(root ^ h))
}

/// A ChaCha12 generator for the named stream.
pub fn stream_rng(root: u64, name: &str) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(stream_seed(root, name))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
