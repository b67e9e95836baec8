//! Deterministic random streams.
//!
//! Every Monte Carlo trial owns a [`RngStream`] whose ChaCha8 key is built
//! directly from `(master seed, point, lane, trial)`. Distinct tuples give
//! distinct 256-bit keys, so streams never overlap and results do not depend
//! on how trials are scheduled across threads.
//!
//! Gaussians come from the ziggurat sampler in `rand_distr::StandardNormal`.
//! Changing that method changes every golden value in the test suite.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Lane identifiers used to separate the independent draws of one trial.
pub mod lane {
    pub const CHANNEL: u64 = 0;
    pub const UPLINK: u64 = 1;
    pub const UPLINK_WARMUP: u64 = 2;
    /// Scheme-specific randomness (DP permutation) is keyed `SCHEME_BASE + scheme tag`.
    pub const SCHEME_BASE: u64 = 16;
    pub const REDRAW_STRIDE: u64 = 1 << 32;
}

#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Stream seeded from a bare 64-bit seed (point/lane/trial all zero).
    pub fn from_seed(seed: u64) -> Self {
        Self::keyed(seed, 0, 0, 0)
    }

    pub fn keyed(seed: u64, point: u64, lane: u64, trial: u64) -> Self {
        let mut key = [0u8; 32];
        for (chunk, word) in key.chunks_exact_mut(8).zip([seed, point, lane, trial]) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        Self {
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// Real standard normal sample.
    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Circularly-symmetric complex Gaussian with `E|z|^2 = variance`.
    pub fn complex_normal(&mut self, variance: f64) -> Complex64 {
        let scale = (0.5 * variance).sqrt();
        let re = self.normal();
        let im = self.normal();
        Complex64::new(scale * re, scale * im)
    }

    pub fn uniform_index(&mut self, upper: usize) -> usize {
        self.inner.random_range(0..upper)
    }

    /// Uniformly random permutation of `0..n` (Fisher-Yates).
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.uniform_index(i + 1);
            order.swap(i, j);
        }
        order
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyed_streams_are_reproducible() {
        let mut a = RngStream::keyed(7, 1, 2, 3);
        let mut b = RngStream::keyed(7, 1, 2, 3);
        for _ in 0..32 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_keys_diverge() {
        let mut a = RngStream::keyed(7, 1, 2, 3);
        let mut b = RngStream::keyed(7, 1, 2, 4);
        let same = (0..16).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn complex_normal_power() {
        let mut rng = RngStream::from_seed(11);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| rng.complex_normal(2.0).norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 0.03, "mean power {mean}");
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut rng = RngStream::from_seed(3);
        let mut p = rng.permutation(17);
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }
}
