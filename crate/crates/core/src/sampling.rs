//! Reproducible random sample points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 42;

/// Axis-aligned box for `Q` and `f`, plus a radius for group elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub q: Vec<(f64, f64)>,
    pub f: Vec<(f64, f64)>,
    pub group_radius: f64,
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.rng.gen_range(lo..hi)
        } else {
            lo
        }
    }

    pub fn in_box(&mut self, bounds: &[(f64, f64)]) -> Vec<f64> {
        bounds.iter().map(|&(lo, hi)| self.uniform(lo, hi)).collect()
    }

    /// Uniform in the ball of the given radius.
    pub fn in_ball(&mut self, dim: usize, radius: f64) -> Vec<f64> {
        loop {
            let x: Vec<f64> = (0..dim).map(|_| self.uniform(-1.0, 1.0)).collect();
            let n2: f64 = x.iter().map(|v| v * v).sum();
            if n2 <= 1.0 {
                return x.into_iter().map(|v| v * radius).collect();
            }
        }
    }

    pub fn vector(&mut self, dim: usize, scale: f64) -> Vec<f64> {
        (0..dim).map(|_| self.uniform(-scale, scale)).collect()
    }
}
