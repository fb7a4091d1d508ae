//! Seeded randomness.
//!
//! Every source of randomness in the crate is a ChaCha8 stream addressed
//! by `(seed, stream)`. Streams are independent, so trial `t` of a
//! simulation can be reproduced without running trials `0..t`, and
//! corpus item `i` of a verification suite without the first `i - 1`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::rand_core;

/// Stream-addressable RNG. Identical `(seed, stream)` pairs yield
/// identical output on every platform.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform f64 in `[0, 1)` with 53 random bits.
#[inline]
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[0, bound)` by rejection (no modulo bias).
pub fn below<R: RngCore>(rng: &mut R, bound: usize) -> usize {
    debug_assert!(bound > 0);
    let bound = bound as u64;
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % bound) as usize;
        }
    }
}
