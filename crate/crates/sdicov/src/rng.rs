//! Seeded, portable random draws.
//!
//! Every random choice in this crate flows through [`SeededRng`] so that
//! instances, matrices, and start points are reproducible from a single u64
//! seed. The generator is ChaCha8 (a published stream cipher, available in
//! most languages). Derived draws are spelled out below so they can be
//! re-implemented elsewhere:
//!
//! - `uniform()`: `(next_u64() >> 11) * 2^-53`, uniform in [0, 1);
//! - `standard_normal()`: Box-Muller on a uniform pair,
//!   `r cos(2 pi u2)` then `r sin(2 pi u2)` with `r = sqrt(-2 ln(1 - u1))`;
//! - `below(n)`: `next_u64() mod n`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SeededRng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Uniform in [0, 1) with 53 random mantissa bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller; draws uniforms in pairs and caches
    /// the sine partner.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u keeps the argument of ln strictly positive
        let r = (-2.0 * (1.0 - self.uniform()).ln()).sqrt();
        let theta = std::f64::consts::TAU * self.uniform();
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Index uniform over 0..n (modulo bias is irrelevant at these sizes and
    /// keeps the draw trivially portable).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0) is undefined");
        (self.inner.next_u64() % n as u64) as usize
    }

    /// Bernoulli(p) drawn from one uniform.
    pub fn chance(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
