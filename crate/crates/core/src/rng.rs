//! Seeded random stream used for synthetic data.
//!
//! The stream is ChaCha8 (as implemented by `rand_chacha` 0.3) seeded with
//! `seed_from_u64`. Uniform variates are built from the top 53 bits of each
//! `u64` output as `(bits + 0.5) / 2^53`, which lies strictly inside (0, 1).
//! Both steps are fixed here so a given seed always reproduces the same data.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform variate on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64 + 0.5) * SCALE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(7);
        let mut b = SeededRng::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn uniform_is_open_interval() {
        let mut rng = SeededRng::new(1);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn stream_is_pinned() {
        // Frozen from the first release; changing this breaks reproducibility
        // of every synthetic dataset.
        let mut rng = SeededRng::new(42);
        let first = rng.next_u64();
        assert_eq!(first, PINNED_42);
    }

    const PINNED_42: u64 = 12_578_764_544_318_200_737;
}
