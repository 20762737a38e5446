//! Deterministic SplitMix64 generator.
//!
//! State update: `state += 0x9E37_79B9_7F4A_7C15`; output mix:
//! `z = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9`,
//! `z = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB`, `z ^ (z >> 31)`
//! (all wrapping). Identical seeds give identical streams on every platform.

use num_bigint::BigInt;

use crate::numerics::Rational;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Dyadic rational `k / 2^53` with `k` uniform in `[0, 2^53)`.
    /// Representable exactly as an `f64` as well.
    pub fn unit_rational(&mut self) -> Rational {
        let k = self.next_u64() >> 11;
        Rational::new(BigInt::from(k), BigInt::from(1u64 << 53))
    }

    /// Uniform dyadic rational in `[low, high)`.
    pub fn uniform_rational(&mut self, low: &Rational, high: &Rational) -> Rational {
        low + (high - low) * self.unit_rational()
    }

    /// Uniform integer in `[0, bound)`; `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}
