//! Reproducible random streams.
//!
//! Every stream is addressed by a master seed and an integer path. The path
//! is folded into a 64-bit key with SplitMix64 finalisers, and the key seeds a
//! ChaCha8 generator, so the same `(seed, path)` always yields the same
//! sequence regardless of which thread or in which order it is requested.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fold_path(master_seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master_seed), |acc, &p| {
        splitmix64(acc ^ splitmix64(p.wrapping_mul(GOLDEN).wrapping_add(1)))
    })
}

/// A deterministic stream of random numbers.
#[derive(Debug, Clone)]
pub struct RandomStream {
    key: u64,
    draws: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    fn from_key(key: u64) -> Self {
        Self {
            key,
            draws: 0,
            rng: ChaCha8Rng::seed_from_u64(key),
        }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.gen::<f64>()
    }

    /// Uniform index in `0..k`. Panics if `k == 0`.
    pub fn index(&mut self, k: usize) -> usize {
        assert!(k > 0, "index() over an empty range");
        self.draws += 1;
        self.rng.gen_range(0..k)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        self.draws += 1;
        items.shuffle(&mut self.rng);
    }

    /// Number of draw calls made so far.
    pub fn position(&self) -> u64 {
        self.draws
    }

    /// Independent child stream; equivalent to extending the derivation path by `index`.
    pub fn child(&self, index: u64) -> RandomStream {
        RandomStream::from_key(splitmix64(self.key ^ splitmix64(index.wrapping_mul(GOLDEN).wrapping_add(1))))
    }
}

/// Derives the stream addressed by `(master_seed, path)`.
pub fn derive_stream(master_seed: u64, path: &[u64]) -> RandomStream {
    RandomStream::from_key(fold_path(master_seed, path))
}
