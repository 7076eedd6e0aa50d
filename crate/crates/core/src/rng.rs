//! Seeded randomness contract.
//!
//! All randomness in the crate flows through [`SplitMix64`], a 64-bit
//! splittable generator (Steele, Lea & Flood 2014). Gaussian draws use the
//! Box-Muller transform, so any (seed, call sequence) pair reproduces
//! identical bytes on every platform. Independent streams for parallel work
//! are derived with [`SplitMix64::derive`].

use crate::math;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 PRNG with a cached spare Gaussian deviate.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 {
            state: seed,
            spare: None,
        }
    }

    /// Independent stream for a sub-task, e.g. a sweep cell or ensemble
    /// member. `derive(seed, i) != derive(seed, j)` streams are decorrelated
    /// by an extra mixing round, so results never depend on scheduling order.
    pub fn derive(seed: u64, index: u64) -> Self {
        let mut base = SplitMix64::new(seed);
        let a = base.next_u64();
        SplitMix64::new(mix(a ^ mix(index.wrapping_mul(GOLDEN_GAMMA))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate via Box-Muller (pairs generated, one cached).
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] so the log is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let t = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * math::sin(t));
        r * math::cos(t)
    }
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
