//! Counter-based random streams.
//!
//! Each trial gets its own ChaCha key derived from `(master seed, trial)`,
//! and each snapshot `t` starts at a fixed word offset inside that stream.
//! Gaussian draws use Box-Muller so every snapshot consumes a fixed number
//! of words; the output is therefore a pure function of `(seed, t)` and
//! independent of how trials are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::C64;

/// SplitMix64 finalizer (a bijection on `u64`).
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under `master`; injective in `trial` for a fixed master.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    mix64(master.wrapping_add(trial.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Words consumed by one circular complex normal (two `u64` uniforms).
const WORDS_PER_NORMAL: u128 = 4;

#[derive(Clone)]
pub struct SnapshotStream {
    rng: ChaCha8Rng,
    per_snapshot: usize,
}

impl SnapshotStream {
    /// Stream keyed by `seed`, drawing `per_snapshot` complex normals per `t`.
    pub fn new(seed: u64, per_snapshot: usize) -> Self {
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
            chunk.copy_from_slice(&mix64(seed ^ (i as u64).wrapping_mul(0xd6e8_feb8_6659_fd93)).to_le_bytes());
        }
        Self {
            rng: ChaCha8Rng::from_seed(key),
            per_snapshot,
        }
    }

    /// Fills `out` (length `per_snapshot`) with i.i.d. CN(0, 1) draws for snapshot `t`.
    pub fn snapshot(&mut self, t: usize, out: &mut [C64]) {
        assert_eq!(out.len(), self.per_snapshot);
        self.rng
            .set_word_pos(t as u128 * self.per_snapshot as u128 * WORDS_PER_NORMAL);
        for v in out.iter_mut() {
            *v = self.complex_normal();
        }
    }

    fn unit_open(&mut self) -> f64 {
        // (0, 1]
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `(u + jv)/√2` with `u, v` standard normal (Box-Muller pair).
    fn complex_normal(&mut self) -> C64 {
        let u1 = self.unit_open();
        let u2 = self.unit_open();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        C64::new(radius * c, radius * s) * std::f64::consts::FRAC_1_SQRT_2
    }
}
