//! Seedable, platform-stable random number generator.
//!
//! All randomness in the crate (weight init, sampling, shuffling) flows through
//! this wrapper around the ChaCha8 stream cipher RNG. ChaCha8 is fully
//! specified, so identical seeds give bit-identical streams on every platform.
//!
//! Parallel tasks never share an `Rng`. Each task gets its own generator via
//! [`Rng::derive`], which mixes the parent seed with the task index through
//! SplitMix64.

use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: rand_chacha::ChaCha8Rng,
}

/// SplitMix64 finalizer, used only for seed derivation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child generator for parallel task `index`.
    ///
    /// `child_seed = splitmix64(parent_seed ^ splitmix64(index + 1))`. The `+1`
    /// keeps `derive(0)` distinct from the parent stream.
    pub fn derive(&self, index: u64) -> Rng {
        Rng::new(splitmix64(self.seed ^ splitmix64(index.wrapping_add(1))))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `[0, n)`, rejection-sampled to avoid modulo bias.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        let n = n as u64;
        let limit = u64::MAX - u64::MAX % n;
        loop {
            let v = self.next_u64();
            if v < limit {
                return (v % n) as usize;
            }
        }
    }

    /// True with probability `p`.
    #[inline]
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform pick from a nonempty slice.
    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.index(items.len())]
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_bit_identical() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..64 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_seeds_differ_early() {
        let mut a = Rng::new(1);
        let mut b = Rng::new(2);
        let differs = (0..16).any(|_| a.next_u64() != b.next_u64());
        assert!(differs);
    }

    #[test]
    fn derived_streams_differ_from_parent_and_siblings() {
        let parent = Rng::new(7);
        let mut p = parent.clone();
        let mut c0 = parent.derive(0);
        let mut c1 = parent.derive(1);
        let a: Vec<u64> = (0..8).map(|_| p.next_u64()).collect();
        let b: Vec<u64> = (0..8).map(|_| c0.next_u64()).collect();
        let c: Vec<u64> = (0..8).map(|_| c1.next_u64()).collect();
        assert_ne!(a, b);
        assert_ne!(b, c);
        assert_ne!(a, c);
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut rng = Rng::new(3);
        let mut v: Vec<usize> = (0..1000).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..1000).collect::<Vec<_>>());
        assert_ne!(v, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn index_is_in_range_and_covers() {
        let mut rng = Rng::new(9);
        let mut seen = [false; 10];
        for _ in 0..1000 {
            let i = rng.index(10);
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}
