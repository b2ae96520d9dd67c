//! Deterministic derivation of independent random streams from one master
//! seed.
//!
//! Every randomized operation in the crate owns a stream derived from the
//! caller's seed and a tag path (group index, replicate index, purpose).
//! Parallel workers never share a stream, so output is bit-identical
//! regardless of thread count or schedule.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes, kept distinct so unrelated uses of the same master seed
/// cannot collide.
pub(crate) const TAG_GROUP: u64 = 0xA1;
pub(crate) const TAG_REPLICATE: u64 = 0xB2;
pub(crate) const TAG_QUANTILE: u64 = 0xC3;
pub(crate) const TAG_SIM_DRAW: u64 = 0xD4;
pub(crate) const TAG_SIM_TEST: u64 = 0xE5;

/// SplitMix64 finalizer; the usual avalanche mixer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a tag.
///
/// Chain calls to build hierarchical streams, e.g.
/// `derive_seed(derive_seed(master, group_tag), replicate_index)`.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    mix64(master ^ mix64(tag.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Two-level derivation: a purpose tag plus an index.
pub(crate) fn derive_seed2(master: u64, tag: u64, index: u64) -> u64 {
    derive_seed(derive_seed(master, tag), index)
}

/// A fresh generator for the given derived seed.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniform draw on the open interval (0, 1).
///
/// Maps the top 53 bits of a `u64` onto the midpoints of the 2^53 dyadic
/// subintervals, so neither endpoint can ever be returned and the normal
/// quantile transform stays finite.
pub(crate) fn open_unit<R: rand::Rng>(rng: &mut R) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}
