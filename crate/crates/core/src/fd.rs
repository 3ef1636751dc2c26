//! Fourth-order central finite differences, used wherever a map is only
//! available as an `f64` evaluator and as the independent check on dual
//! derivatives.

/// Default absolute step.
pub const STEP: f64 = 1e-5;

/// `f'(0)` along a one-parameter family.
pub fn derivative(h: f64, f: impl Fn(f64) -> f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

pub fn derivative_vec(h: f64, f: impl Fn(f64) -> Vec<f64>) -> Vec<f64> {
    let (p2, p1, m1, m2) = (f(2.0 * h), f(h), f(-h), f(-2.0 * h));
    (0..p1.len())
        .map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h))
        .collect()
}

fn shifted(x: &[f64], k: usize, t: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[k] += t;
    y
}

pub fn gradient(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len()).map(|k| derivative(h, |t| f(&shifted(x, k, t)))).collect()
}

/// Columns `∂f/∂x_k`, returned as `jac[i][k]`.
pub fn jacobian(x: &[f64], h: f64, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<Vec<f64>> {
    let cols: Vec<Vec<f64>> = (0..x.len()).map(|k| derivative_vec(h, |t| f(&shifted(x, k, t)))).collect();
    let rows = cols.first().map_or(0, |c| c.len());
    (0..rows).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

/// Derivative along `direction`.
pub fn directional(x: &[f64], direction: &[f64], h: f64, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    derivative_vec(h, |t| {
        let y: Vec<f64> = x.iter().zip(direction).map(|(a, d)| a + t * d).collect();
        f(&y)
    })
}
