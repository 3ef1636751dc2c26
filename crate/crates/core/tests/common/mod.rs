#![allow(dead_code)]

pub mod frames;

use std::path::Path;

use lp_reduce::cli::RunConfig;
use lp_reduce::dual;
use lp_reduce::gauge::{decompose, GaugeOptions};
use lp_reduce::oracle::FullState;
use lp_reduce::sampling::Sampler;
use lp_reduce::system::rep_bar;
use lp_reduce::{AnySystem, Dual64, Mat, Mat64, MechanicalSystem, So3Warped};

pub const SO3_CONFIG: &str = include_str!("../../../../configs/so3-warped.json");
pub const TWO_VECTORS_CONFIG: &str = include_str!("../../../../configs/two-vectors.json");

pub fn config(text: &str) -> RunConfig {
    RunConfig::from_json(text, Path::new("test-config.json")).unwrap()
}

pub fn so3() -> So3Warped {
    So3Warped::new()
}

pub fn two_vectors() -> AnySystem {
    config(TWO_VECTORS_CONFIG).system.build(Path::new("two-vectors.json")).unwrap()
}

/// A point of the slice together with a group element.
#[derive(Clone, Debug)]
pub struct Adapted {
    pub q: Vec<f64>,
    pub f: Vec<f64>,
    pub a: Vec<f64>,
}

impl Adapted {
    /// `(Q*, f̃, a)` flattened.
    pub fn z(&self) -> Vec<f64> {
        self.q.iter().chain(&self.f).chain(&self.a).copied().collect()
    }
}

/// Random ambient points pushed onto the slice, each paired with a random
/// group element inside the sampling ball.
pub fn adapted_samples<S: MechanicalSystem>(sys: &S, n: usize, seed: u64) -> Vec<Adapted> {
    let bx = sys.sample_box().clone();
    let mut rng = Sampler::new(seed);
    let opts = GaugeOptions::default();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let q = rng.in_box(&bx.q);
        let f = rng.in_box(&bx.f);
        let a = rng.in_ball(sys.group().dim(), bx.group_radius);
        if let Ok(pt) = decompose(sys, &q, &f, None, &opts) {
            out.push(Adapted { q: pt.q_star, f: pt.f_tilde, a });
        }
    }
    out
}

/// Directional derivative of a matrix-valued map, through dual numbers.
pub fn d_along(x: &[f64], dir: &[f64], f: impl Fn(&[Dual64]) -> Mat<Dual64>) -> Mat64 {
    f(&dual::seed_direction(x, dir)).map_to(|v| v.eps)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Running maximum of named residuals.
#[derive(Default, Debug)]
pub struct Worst {
    pub items: Vec<(String, f64)>,
}

impl Worst {
    pub fn add(&mut self, name: &str, value: f64) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        match self.items.iter_mut().find(|(n, _)| n == name) {
            Some(e) => e.1 = e.1.max(value),
            None => self.items.push((name.to_string(), value)),
        }
    }

    pub fn max(&self) -> (String, f64) {
        self.items
            .iter()
            .cloned()
            .fold((String::from("-"), 0.0), |a, b| if b.1 > a.1 { b } else { a })
    }

    pub fn over(&self, tol: f64) -> Vec<(String, f64)> {
        self.items.iter().filter(|(_, v)| *v >= tol).cloned().collect()
    }
}

/// Full state moved by the group element `b`, velocities pushed along.
pub fn translate<S: MechanicalSystem>(sys: &S, s: &FullState, b: &[f64]) -> FullState {
    let bc = dual::constants(b);
    let q = sys.action(&dual::seed_direction(&s.q, &s.q_dot), &bc).unwrap();
    let rb = rep_bar(sys, b);
    FullState { q: dual::values(&q), f: rb.matvec(&s.f), q_dot: dual::tangents(&q), f_dot: rb.matvec(&s.f_dot) }
}
