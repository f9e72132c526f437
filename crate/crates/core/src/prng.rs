//! SplitMix64, the pinned pseudo-random generator behind every simulation.
//!
//! The generator is counter based: the `i`-th output (1-based) is
//! `mix(seed + i * 0x9E3779B97F4A7C15)` with the standard SplitMix64 finalizer,
//! all arithmetic modulo `2^64`. Uniform doubles take the top 53 bits:
//! `(x >> 11) * 2^-53`, which lies in `[0, 1)`.
//!
//! Reference vector: seed `1234567` yields `6457827717110365317`,
//! `3203168211198807973`, `9817491932198370423`, `4593380528125082431`,
//! `16408922859458223821`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
