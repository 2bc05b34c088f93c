//! Seeded randomness.
//!
//! Every stochastic operation in the crate takes an explicit `u64` seed and
//! draws from a ChaCha stream cipher, a counter-based generator whose output
//! is identical on every platform. Independent substreams are derived by
//! mixing a tag into the seed, so concurrent consumers (per-trial experiment
//! seeds, per-slice shuffles) never share state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type SessionRng = ChaCha8Rng;

/// A generator for the main stream of `seed`.
pub fn seeded(seed: u64) -> SessionRng {
    SessionRng::seed_from_u64(seed)
}

/// Mixes a tag into a seed (two rounds of the SplitMix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for _ in 0..2 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// A generator for an independent substream identified by `tag`.
pub fn substream(seed: u64, tag: u64) -> SessionRng {
    seeded(derive_seed(seed, tag))
}
