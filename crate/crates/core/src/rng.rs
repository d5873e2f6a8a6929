//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream keyed by a
//! user seed and a fixed stream tag, so identical seeds give bit-identical results
//! and unrelated consumers never share a stream.

use alloc::vec::Vec;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

/// Stream tags. Only their distinctness matters.
pub mod stream {
    pub const KERNEL_MC: u64 = 1;
    pub const FEATURES: u64 = 2;
    pub const INIT: u64 = 3;
    pub const SHUFFLE: u64 = 4;
    pub const TARGET: u64 = 5;
    pub const CALIBRATION: u64 = 6;
    pub const DATA_X: u64 = 7;
    pub const SPLIT: u64 = 8;
    pub const RATE_TEST: u64 = 9;
    pub const RATE_BANKS: u64 = 10;
    pub const PAIRS: u64 = 11;
    pub const DERIVE: u64 = 12;
}

pub fn seeded(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A child seed for `tag`, so one master seed can key many independent runs.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream::DERIVE);
    rng.set_word_pos(u128::from(tag) * 2);
    rng.next_u64()
}

#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| normal(rng)).collect()
}

/// Uniformly random permutation of `0..n` (Fisher-Yates).
pub fn permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx
}
