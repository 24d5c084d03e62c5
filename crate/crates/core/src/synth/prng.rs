//! SplitMix64 and the derived draws used by the generator.
//!
//! Only integer arithmetic, additions and one multiplication by a power of
//! two are involved, so the streams are bit-identical on every platform.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 (Steele, Lea and Flood).
#[derive(Debug, Clone)]
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

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Approximately standard normal: the sum of twelve uniforms minus 6
    /// (mean 0, variance 1, support `[-6, 6]`).
    pub fn next_normal(&mut self) -> f64 {
        let mut sum = 0.0;
        for _ in 0..12 {
            sum += self.next_f64();
        }
        sum - 6.0
    }
}

/// Seed of the `index`-th artifact's stream (0-based).
pub fn artifact_seed(seed: u64, index: usize) -> u64 {
    let offset = (index as u64).wrapping_add(1).wrapping_mul(GOLDEN_GAMMA);
    SplitMix64::new(seed ^ offset).next_u64()
}
