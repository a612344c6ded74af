//! Random streams for simulation runs.
//!
//! Every student run owns one [`SimRng`] stream. The generator family is
//! xoshiro256** seeded through SplitMix64 (`seed_from_u64`), and per-run
//! seeds are derived from the master seed with [`derive_seed`]:
//!
//! ```text
//! mix(z)  = splitmix64 finalizer:
//!           z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//!           z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//!           z ^ (z >> 31)
//! h0 = mix(master + G)
//! h1 = mix(h0 ^ (iteration + G))
//! seed = mix(h1 ^ (student + G))        G = 0x9e3779b97f4a7c15, wrapping arithmetic
//! ```
//!
//! Uniform draws in `[0, 1)` take the top 53 bits of `next_u64`.
//! Together these fix every stream bit-for-bit, so another implementation
//! using the same generator reproduces the same traces.

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

pub type SimRng = Xoshiro256StarStar;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the run of `student` in repetition `iteration`.
pub fn derive_seed(master_seed: u64, iteration: u64, student: u64) -> u64 {
    let h = mix64(master_seed.wrapping_add(GOLDEN_GAMMA));
    let h = mix64(h ^ iteration.wrapping_add(GOLDEN_GAMMA));
    mix64(h ^ student.wrapping_add(GOLDEN_GAMMA))
}

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
