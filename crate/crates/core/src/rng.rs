//! Seeded pseudo-random streams.
//!
//! All randomness in the harness flows through [`Rng`]: a xoshiro256** state
//! expanded from a 64-bit seed with splitmix64. Derived draws are defined
//! here explicitly so that another implementation can reproduce the exact
//! streams:
//!
//! * `uniform()` = `(next_u64() >> 11) * 2^-53`, in `[0, 1)`
//! * `uniform_in(lo, hi)` = `lo + (hi - lo) * uniform()`
//! * `bernoulli(p)` = `uniform() < p`
//! * `normal()` = Box-Muller cosine branch with `u1 = 1 - uniform()` and
//!   `u2 = uniform()` (two `u64` draws per normal, the sine branch is discarded)
//! * `below(n)` = high 64 bits of `next_u64() * n` (multiply-shift)

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

/// Identifier recorded in report provenance blocks.
pub const PRNG_ID: &str = "xoshiro256**(splitmix64-seeded)";

#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256StarStar,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        // rand_xoshiro expands u64 seeds with splitmix64.
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform index in `0..n`. `n` must be nonzero.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}
