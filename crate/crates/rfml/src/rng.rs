//! Deterministic counter-based random number generation.
//!
//! All randomness in the crate flows through [`SplitMix64`], a counter-based
//! generator (64-bit Weyl sequence plus a finalizing mix). The integer stream
//! depends only on the seed, never on platform word size or call history
//! quirks, so fixtures and datasets are reproducible everywhere.

/// SplitMix64 generator.
///
/// The state advances by the Weyl constant `0x9E3779B97F4A7C15` and each
/// output is an avalanche mix of the current counter, so the k-th output is a
/// pure function of `(seed, k)`.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Derive an independent stream for a named substream.
    ///
    /// Mixing the label through the generator keeps substreams (dataset
    /// coordinates, split shuffles, ...) decoupled from one another while
    /// staying a pure function of `(seed, label)`.
    pub fn substream(seed: u64, label: &str) -> Self {
        let mut h = seed ^ 0x51_7c_c1_b7_27_22_0a_95;
        for &b in label.as_bytes() {
            h = (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3);
        }
        Self::new(h)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal deviate via Box-Muller (no caching, two uniforms per
    /// draw, so the stream position is predictable).
    pub fn normal(&mut self) -> f64 {
        let u1 = (1.0 - self.next_f64()).max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `[0, n)` by rejection, bias-free.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            slice.swap(i, j);
        }
    }
}
