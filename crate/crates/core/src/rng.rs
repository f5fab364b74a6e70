//! Keyed counter stream used for every random draw in the crate.
//!
//! ChaCha is a counter-mode cipher: the master seed keys it, the realization
//! index selects the stream, and consumers draw words in a fixed canonical
//! order. The same (seed, realization) pair therefore reproduces bit-identical
//! output on every platform and under any parallel schedule.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream of uniform draws keyed by (master seed, realization index).
pub struct SeedStream {
    rng: ChaCha8Rng,
}

impl SeedStream {
    pub fn new(master_seed: u64, realization: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(realization);
        SeedStream { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in [0, 1) with 53-bit mantissa resolution.
    pub fn unit_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [lo, hi).
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit_f64()
    }

    /// Uniform integer in [lo, hi] (inclusive), by rejection-free scaling.
    pub fn range_usize(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as f64;
        lo + (self.unit_f64() * span) as usize
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit_f64() < p
    }
}
