//! Deterministic splitmix64 generator.
//!
//! Every stochastic choice in the simulator and harness flows through this
//! one generator so runs are reproducible from a single seed across
//! platforms. Streams are derived by hashing (seed, index) pairs, which keeps
//! parallel trials independent of scheduling order.

#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng { state: seed }
    }

    /// Independent stream i of a master seed.
    pub fn stream(seed: u64, i: u64) -> Rng {
        let mut r = Rng::new(seed);
        let base = r.next_u64();
        Rng::new(mix(
            base ^ mix(i.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1))
        ))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix(self.state)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Multiply-shift bounding; bias is negligible for our small n.
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Standard normal via Box-Muller (uses two draws per pair, caches none
    /// so call counts stay position-independent).
    pub fn gaussian(&mut self) -> f64 {
        let u1 = (1.0 - self.next_f64()).max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
