//! Seeded randomness.
//!
//! All random draws go through SplitMix64 so that mappings and datasets can be
//! reproduced in any language from the seed alone:
//!
//! * `u64`: the raw SplitMix64 output;
//! * uniform real in `[0, 1)`: `(next >> 11) * 2^-53`;
//! * integer below `n`: `(next * n) >> 64` computed in 128 bits.
//!
//! The first outputs for seed 0 are `0xE220A8397B1DCDAF`,
//! `0x6E789E6AA1B965F4`, `0x06C45D188009454F`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

/// Combines a base seed with further words into a derived seed.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    let mut acc = base;
    for &w in words {
        acc = Rng::new(acc ^ w.rotate_left(29)).next_u64();
    }
    Rng::new(acc).next_u64()
}

/// FNV-1a hash of a string, used to turn identifiers into seed words.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
