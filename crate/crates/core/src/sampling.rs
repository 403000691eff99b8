//! Deterministic sample points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cxjet::Cx;

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform re/im in [−r, r], rejected until |c| ≤ r.
    pub fn disc(&mut self, r: f64) -> Cx {
        loop {
            let c = Cx::new(self.rng.gen_range(-r..=r), self.rng.gen_range(-r..=r));
            if c.norm() <= r {
                return c;
            }
        }
    }

    /// A point of the polydisc |z_j| ≤ r.
    pub fn polydisc(&mut self, n: usize, r: f64) -> Vec<Cx> {
        (0..n).map(|_| self.disc(r)).collect()
    }

    /// Uniform modulus in [r_min, r_max] and uniform argument.
    pub fn annulus(&mut self, r_min: f64, r_max: f64) -> Cx {
        let m = self.rng.gen_range(r_min..=r_max);
        let a = self.rng.gen_range(0.0..std::f64::consts::TAU);
        Cx::from_polar(m, a)
    }

    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn integer(&mut self, lo: u32, hi: u32) -> u32 {
        self.rng.gen_range(lo..=hi)
    }
}
