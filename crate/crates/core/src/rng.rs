//! Counter-based random streams.
//!
//! Every innovation is addressed by `(stream seed, absolute index)` and read
//! from a fixed offset of a ChaCha8 keystream, so draws are reproducible,
//! order-independent, and invariant to how work is split across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One ChaCha block (16 u32 words) reserved per addressed draw. Variable-rate
/// samplers (ziggurat tails) may read past their block; that only overlaps
/// the next block's keystream and never affects determinism.
const WORDS_PER_DRAW: u128 = 16;

/// Random stream with O(1) access to the state preceding any draw index.
pub struct CounterRng {
    rng: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Position the stream at draw `index` and hand out the generator.
    pub fn at(&mut self, index: u64) -> &mut ChaCha8Rng {
        self.rng.set_word_pos(u128::from(index) * WORDS_PER_DRAW);
        &mut self.rng
    }
}

/// Deterministic per-replicate seed derived from a master seed.
///
/// SplitMix64 finalizer over the master seed advanced by the replicate
/// index; statistically independent streams without shared state.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
