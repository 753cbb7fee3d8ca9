//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 generator keyed by the user
//! seed, with the 64-bit ChaCha stream id selecting an independent
//! sub-stream. Work that runs in parallel (sample chunks, sweep points) owns
//! its own stream id, so results do not depend on scheduling.
//!
//! Normal variates use the inverse CDF of a uniform on the open interval
//! `(0, 1)`, one uniform per variate.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

/// Stream ids used by the harness.
pub mod streams {
    pub const ROTATION: u64 = 0;
    pub const MEAN: u64 = 1;
    pub const SPECTRUM: u64 = 2;
    /// Sample chunk `k` uses stream `SAMPLES + k`.
    pub const SAMPLES: u64 = 1 << 32;
}

impl RngSeed {
    pub fn stream(self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(id);
        rng
    }

    /// A different seed derived from this one, for nested experiments.
    pub fn derive(self, salt: u64) -> RngSeed {
        let mut rng = self.stream(salt.wrapping_add(1 << 48));
        RngSeed(rng.next_u64())
    }
}

/// Uniform on the open interval `(0, 1)` from the top 53 bits.
pub fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    Normal::standard().inverse_cdf(open_unit(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngSeed(42).stream(3);
        let mut b = RngSeed(42).stream(3);
        for _ in 0..100 {
            assert_eq!(
                standard_normal(&mut a).to_bits(),
                standard_normal(&mut b).to_bits()
            );
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngSeed(42).stream(0);
        let mut b = RngSeed(42).stream(1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn open_unit_bounds() {
        let mut rng = RngSeed(7).stream(0);
        for _ in 0..10_000 {
            let u = open_unit(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = RngSeed(11).stream(0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt());
    }
}
