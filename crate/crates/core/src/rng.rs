//! Reproducible random streams for the Monte-Carlo estimators.
//!
//! Every stream is a xoshiro256++ generator whose 64-bit seed is derived from
//! a root seed and a path of stream coordinates by chaining SplitMix64
//! finalizers. Two streams with different coordinate paths are statistically
//! independent; the same path always yields the same sequence, on every
//! platform and independent of thread scheduling.
//!
//! Draw-order conventions (what each stream is used for, and in what order)
//! are documented at the call sites.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub use rand_xoshiro::Xoshiro256PlusPlus as StreamRng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `root` and a coordinate path.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(root), |acc, &c| mix64(acc ^ mix64(c)))
}

/// Opens the stream addressed by `root` and `path`.
pub fn stream(root: u64, path: &[u64]) -> StreamRng {
    Xoshiro256PlusPlus::seed_from_u64(derive_seed(root, path))
}

/// A Bernoulli coin with a 53-bit integer threshold.
///
/// `flip` consumes exactly one `u64` per call, which keeps coupled streams
/// (same seed, different probabilities) aligned draw for draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coin(u64);

impl Coin {
    const SCALE: f64 = (1u64 << 53) as f64;

    pub fn new(p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Coin((p * Self::SCALE).round() as u64)
    }

    #[inline(always)]
    pub fn flip<R: RngCore + ?Sized>(self, rng: &mut R) -> bool {
        (rng.next_u64() >> 11) < self.0
    }
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / Coin::SCALE)
}
