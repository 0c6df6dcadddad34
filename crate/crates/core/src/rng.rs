//! Counter-based random streams.
//!
//! Every random quantity is addressed by `(seed, domain, stream, index)` on top of
//! ChaCha8, so values do not depend on the order in which they are requested.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Domain tags keep independent consumers of one seed apart.
pub mod domain {
    pub const CONDUCTANCE: u64 = 1;
    pub const WALK: u64 = 2;
    pub const PERCOLATION: u64 = 3;
    pub const SAMPLER: u64 = 4;
    pub const SEARCH: u64 = 5;
    pub const TREES: u64 = 6;
}

fn key(seed: u64, domain: u64) -> [u8; 32] {
    let mut k = [0u8; 32];
    k[..8].copy_from_slice(&seed.to_le_bytes());
    k[8..16].copy_from_slice(&domain.to_le_bytes());
    k
}

/// An independent sequential stream, e.g. one Monte Carlo trial.
pub fn stream(seed: u64, domain: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, domain));
    rng.set_stream(stream);
    rng
}

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
pub fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `(0, 1]`.
#[inline]
pub fn unit_open_zero(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `0..n`.
#[inline]
pub fn below(rng: &mut impl RngCore, n: u64) -> u64 {
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}

/// Random access to the values of one stream by index.
pub struct Keyed {
    rng: ChaCha8Rng,
}

impl Keyed {
    pub fn new(seed: u64, domain: u64) -> Self {
        Self { rng: stream(seed, domain, 0) }
    }

    /// The 64-bit word at position `index`.
    pub fn word(&mut self, index: u64) -> u64 {
        self.rng.set_word_pos(index as u128 * 2);
        self.rng.next_u64()
    }

    /// Uniform on `(0, 1]` at position `index`.
    pub fn open_zero(&mut self, index: u64) -> f64 {
        ((self.word(index) >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
