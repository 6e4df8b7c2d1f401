//! Counter-based random streams.
//!
//! A stream is ChaCha8 keyed by `(seed, domain)` with the ChaCha stream id
//! set to the path index. Draw `step` of a stream always reads the same
//! word positions, so any `(seed, path, step)` value can be regenerated in
//! isolation and results never depend on evaluation order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Separates independent uses of the same user seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Mtm = 1,
    Default = 2,
    Sweep = 3,
}

/// 32-bit words consumed by one draw: two `u64` uniforms.
const WORDS_PER_DRAW: u128 = 4;

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Positions `rng` at the start of draw `step`.
pub fn seek(rng: &mut ChaCha8Rng, step: u64) {
    rng.set_word_pos(step as u128 * WORDS_PER_DRAW);
}

/// Uniform on `(0, 1]` with 53 bits of resolution.
pub fn uniform_open_closed<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal by Box-Muller (cosine branch); consumes exactly one
/// draw.
pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    let u1 = uniform_open_closed(rng);
    let u2 = uniform_open_closed(rng);
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

/// The normal used at `step` of path `index`, regenerated from scratch.
pub fn normal_at(seed: u64, domain: Domain, index: u64, step: u64) -> f64 {
    let mut rng = stream(seed, domain, index);
    seek(&mut rng, step);
    standard_normal(&mut rng)
}
