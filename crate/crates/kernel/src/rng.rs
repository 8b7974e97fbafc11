use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::matrix::Matrix;

/// Seeded deterministic random generator.
///
/// Backed by a counter-based ChaCha stream cipher, so identical seeds
/// produce identical streams across runs and platforms. Independent
/// sub-streams (for per-sample parallel work) come from `with_stream`.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha12Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `stream` of the generator seeded with `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One standard normal sample.
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Matrix of i.i.d. `N(0, std^2)` samples.
    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize, std: f64) -> Matrix {
        debug_assert!(std >= 0.0);
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, std * self.standard_normal());
            }
        }
        m
    }

    /// Uniform draw from `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Uniform draw from `[lo, hi]` inclusive.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.gen_range(lo..=hi)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.inner.gen_range(0..=i);
            items.swap(i, j);
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = Rng::new(42).gaussian_matrix(4, 5, 1.0);
        let b = Rng::new(42).gaussian_matrix(4, 5, 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn different_streams_differ() {
        let a = Rng::with_stream(42, 0).gaussian_matrix(2, 2, 1.0);
        let b = Rng::with_stream(42, 1).gaussian_matrix(2, 2, 1.0);
        assert_ne!(a, b);
    }

    #[test]
    fn zero_std_gives_zero_matrix() {
        let m = Rng::new(7).gaussian_matrix(3, 3, 0.0);
        assert!(m.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sample_std_near_one_for_large_samples() {
        // 10^5 samples; sample std must land in [0.98, 1.02].
        let m = Rng::new(0).gaussian_matrix(1000, 100, 1.0);
        let mean = m.mean();
        let var = m.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (m.data().len() - 1) as f64;
        let std = var.sqrt();
        assert!((0.98..=1.02).contains(&std), "sample std {std}");
        assert!(mean.abs() < 0.02, "sample mean {mean}");
    }

    #[test]
    fn shuffle_is_deterministic_permutation() {
        let mut a: Vec<usize> = (0..20).collect();
        let mut b: Vec<usize> = (0..20).collect();
        Rng::new(3).shuffle(&mut a);
        Rng::new(3).shuffle(&mut b);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }
}
