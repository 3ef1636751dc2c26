//! Charted Lie groups in canonical (exponential) coordinates.
//!
//! A group is described by its structure constants `c^γ_{αβ}` and a faithful
//! matrix realization `X_α` with `[X_α, X_β] = c^γ_{αβ} X_γ`. Index
//! conventions for the coefficient matrices (all stored as `m[(row, col)]`):
//!
//! * `ad(a)[(γ, β)] = a^α c^γ_{αβ}`
//! * `u(a) = Σ (-ad)^k/(k+1)!`   (pulls `ȧ` back to the left-trivialized velocity)
//! * `ū(a) = Σ ad^k/(k+1)!`      (right-trivialized velocity)
//! * `ρ(a) = exp(ad(a)) = ū v`   (adjoint representation), `ρ̄ = ρ^{-1}`
//!
//! The left-invariant field `L_α` has components `v[(ν, α)]`.

use std::f64::consts::PI;

use crate::dual::{self, Dual};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

const SERIES_TERMS: usize = 30;
const LOG_MAX_ITER: usize = 60;

#[derive(Clone, Debug)]
pub struct LieGroup {
    name: String,
    dim: usize,
    /// `c[γ][α][β]` flattened.
    structure: Vec<f64>,
    realization: Vec<Mat<f64>>,
    gram_inv: Mat<f64>,
    chart_radius: f64,
}

/// Maurer–Cartan coefficient matrices and the adjoint representation at a point.
#[derive(Clone, Debug)]
pub struct GroupMatrices<T: Scalar> {
    pub u: Mat<T>,
    pub ubar: Mat<T>,
    pub v: Mat<T>,
    pub vbar: Mat<T>,
    pub rho: Mat<T>,
    pub rho_bar: Mat<T>,
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn epsilon_table() -> Vec<f64> {
    let mut c = vec![0.0; 27];
    for g in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                c[g * 9 + a * 3 + b] = levi_civita(a, b, g);
            }
        }
    }
    c
}

/// `4x4` real matrix of left multiplication by the quaternion `w + xi + yj + zk`.
fn quaternion_left(w: f64, x: f64, y: f64, z: f64) -> Mat<f64> {
    Mat::from_rows(&[
        vec![w, -x, -y, -z],
        vec![x, w, -z, y],
        vec![y, z, w, -x],
        vec![z, -y, x, w],
    ])
}

fn commutator<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    &a.matmul(b) - &b.matmul(a)
}

fn frobenius<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> T {
    a.data().iter().zip(b.data()).map(|(&x, &y)| x * y).sum()
}

impl LieGroup {
    /// SO(3) with `c^γ_{αβ} = ε_{αβγ}`, realized by `(E_α)_{ij} = -ε_{αij}`.
    pub fn so3() -> Self {
        let realization = (0..3)
            .map(|a| Mat::from_fn(3, 3, |i, j| -levi_civita(a, i, j)))
            .collect();
        Self::from_table("so3", 3, epsilon_table(), realization, 0.9 * PI)
            .expect("built-in so(3) table is valid")
    }

    /// SU(2) with the same structure constants, realized on unit quaternions.
    pub fn su2() -> Self {
        let realization = vec![
            quaternion_left(0.0, 0.5, 0.0, 0.0),
            quaternion_left(0.0, 0.0, 0.5, 0.0),
            quaternion_left(0.0, 0.0, 0.0, 0.5),
        ];
        Self::from_table("su2", 3, epsilon_table(), realization, 0.9 * PI)
            .expect("built-in su(2) table is valid")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "so3" | "so(3)" => Some(Self::so3()),
            "su2" | "su(2)" => Some(Self::su2()),
            _ => None,
        }
    }

    /// Build a group from an explicit table, checking antisymmetry, Jacobi and
    /// that the realization closes with the given constants.
    pub fn from_table(
        name: &str,
        dim: usize,
        structure: Vec<f64>,
        realization: Vec<Mat<f64>>,
        chart_radius: f64,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::Precondition(format!("group '{name}': {m}")));
        if dim == 0 || structure.len() != dim * dim * dim {
            return bad(format!("expected {} structure constants", dim * dim * dim));
        }
        if realization.len() != dim || realization.iter().any(|m| !m.is_square()) {
            return bad(format!("expected {dim} square realization matrices"));
        }
        if !(chart_radius > 0.0) {
            return bad("chart radius must be positive".into());
        }
        let n = realization[0].rows();
        if realization.iter().any(|m| m.rows() != n) {
            return bad("realization matrices differ in size".into());
        }
        let c = |g: usize, a: usize, b: usize| structure[g * dim * dim + a * dim + b];
        for g in 0..dim {
            for a in 0..dim {
                for b in 0..dim {
                    if c(g, a, b) != -c(g, b, a) {
                        return bad(format!("c^{g}_{{{a}{b}}} is not antisymmetric"));
                    }
                }
            }
        }
        let mut jacobi = 0.0_f64;
        for a in 0..dim {
            for b in 0..dim {
                for g in 0..dim {
                    for r in 0..dim {
                        let s: f64 = (0..dim)
                            .map(|s| {
                                c(s, a, b) * c(r, s, g) + c(s, b, g) * c(r, s, a) + c(s, g, a) * c(r, s, b)
                            })
                            .sum();
                        jacobi = jacobi.max(s.abs());
                    }
                }
            }
        }
        if jacobi > 1e-12 {
            return bad(format!("Jacobi identity violated by {jacobi:.3e}"));
        }
        for a in 0..dim {
            for b in 0..dim {
                let lhs = commutator(&realization[a], &realization[b]);
                let mut rhs = Mat::zeros(n, n);
                for (g, x) in realization.iter().enumerate() {
                    rhs = &rhs + &x.scale(c(g, a, b));
                }
                if lhs.max_abs_diff(&rhs) > 1e-12 {
                    return bad(format!("realization does not close: [X_{a}, X_{b}]"));
                }
            }
        }
        let gram = Mat::from_fn(dim, dim, |a, b| frobenius(&realization[a], &realization[b]));
        let gram_inv = gram
            .try_inverse()
            .map_err(|_| Error::Precondition(format!("group '{name}': realization is not faithful")))?;
        Ok(LieGroup { name: name.to_string(), dim, structure, realization, gram_inv, chart_radius })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chart_radius(&self) -> f64 {
        self.chart_radius
    }

    pub fn realization(&self) -> &[Mat<f64>] {
        &self.realization
    }

    /// `c^γ_{αβ}`.
    #[inline]
    pub fn c(&self, gamma: usize, alpha: usize, beta: usize) -> f64 {
        self.structure[(gamma * self.dim + alpha) * self.dim + beta]
    }

    pub fn structure_constants(&self) -> &[f64] {
        &self.structure
    }

    /// `ad(ξ)[(γ, β)] = ξ^α c^γ_{αβ}`.
    pub fn ad<T: Scalar>(&self, xi: &[T]) -> Mat<T> {
        let n = self.dim;
        Mat::from_fn(n, n, |g, b| {
            let mut s = T::zero();
            for (a, &x) in xi.iter().enumerate() {
                let cg = self.c(g, a, b);
                if cg != 0.0 {
                    s += x * T::from_f64(cg);
                }
            }
            s
        })
    }

    /// Lie bracket `[ξ, η]^γ = c^γ_{αβ} ξ^α η^β`.
    pub fn bracket<T: Scalar>(&self, xi: &[T], eta: &[T]) -> Vec<T> {
        self.ad(xi).matvec(eta)
    }

    /// Jacobi-identity residual (for reporting).
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for g in 0..n {
                    for r in 0..n {
                        let s: f64 = (0..n)
                            .map(|s| {
                                self.c(s, a, b) * self.c(r, s, g)
                                    + self.c(s, b, g) * self.c(r, s, a)
                                    + self.c(s, g, a) * self.c(r, s, b)
                            })
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn norm<T: Scalar>(&self, a: &[T]) -> f64 {
        a.iter().map(|x| x.re() * x.re()).sum::<f64>().sqrt()
    }

    pub fn in_chart<T: Scalar>(&self, a: &[T]) -> bool {
        self.norm(a) < self.chart_radius
    }

    pub fn check_chart<T: Scalar>(&self, a: &[T]) -> Result<()> {
        let norm = self.norm(a);
        if norm.is_finite() && norm < self.chart_radius {
            Ok(())
        } else {
            Err(Error::ChartExit { norm, radius: self.chart_radius })
        }
    }

    pub fn identity<T: Scalar>(&self) -> Vec<T> {
        vec![T::zero(); self.dim]
    }

    /// Inverse element; in canonical coordinates simply `-a`.
    pub fn inverse<T: Scalar>(&self, a: &[T]) -> Vec<T> {
        a.iter().map(|&x| -x).collect()
    }

    /// Matrix realization `exp(a^α X_α)`.
    pub fn exp_realization<T: Scalar>(&self, a: &[T]) -> Mat<T> {
        self.algebra_matrix(a).exp()
    }

    fn algebra_matrix<T: Scalar>(&self, a: &[T]) -> Mat<T> {
        let n = self.realization[0].rows();
        let mut m = Mat::zeros(n, n);
        for (x, &coef) in self.realization.iter().zip(a) {
            m = &m + &Mat::lift(x).scale(coef);
        }
        m
    }

    /// Coordinates of the algebra element closest (Frobenius) to `m`.
    fn project<T: Scalar>(&self, m: &Mat<T>) -> Vec<T> {
        let pairings: Vec<T> =
            self.realization.iter().map(|x| frobenius(&Mat::lift(x), m)).collect();
        Mat::lift(&self.gram_inv).matvec(&pairings)
    }

    /// Canonical-coordinate product `log(exp(a) exp(b))`, computed by Newton
    /// iteration on the matrix realization starting from the second-order
    /// Baker–Campbell–Hausdorff guess.
    pub fn multiply<T: Scalar>(&self, a: &[T], b: &[T]) -> Result<Vec<T>> {
        let target = self.exp_realization(a).matmul(&self.exp_realization(b));
        let half = T::from_f64(0.5);
        let br = self.bracket(a, b);
        let guess: Vec<T> = (0..self.dim).map(|i| a[i] + b[i] + half * br[i]).collect();
        self.log_near(&target, guess)
    }

    /// Logarithm of a realization matrix given a nearby starting point.
    pub fn log_near<T: Scalar>(&self, target: &Mat<T>, mut c: Vec<T>) -> Result<Vec<T>> {
        let n = target.rows();
        let mut converged_at = None;
        for it in 0..LOG_MAX_ITER {
            if self.norm(&c) > 2.0 * self.chart_radius || !c.iter().all(|x| x.is_finite()) {
                break;
            }
            let residual = &self.exp_realization(&self.inverse(&c)).matmul(target) - &Mat::identity(n);
            let delta = self.project(&residual);
            let step = self.u(&c).solve(&delta);
            let step = match step {
                Ok(s) => s,
                Err(_) => break,
            };
            let size = self.norm(&step);
            for (ci, si) in c.iter_mut().zip(&step) {
                *ci += *si;
            }
            // Two extra sweeps after the value converges settle any tangent parts.
            match converged_at {
                Some(k) if it >= k + 2 => break,
                None if size < 1e-15 * (1.0 + self.norm(&c)) => converged_at = Some(it),
                _ => {}
            }
        }
        self.check_chart(&c)?;
        if converged_at.is_none() {
            let residual = &self.exp_realization(&self.inverse(&c)).matmul(target) - &Mat::identity(n);
            let r = residual.max_abs();
            if r > 1e-10 {
                return Err(Error::NoConvergence { iterations: LOG_MAX_ITER, residual: r });
            }
        }
        Ok(c)
    }

    fn series<T: Scalar>(x: &Mat<T>) -> Mat<T> {
        // Σ_k x^k/(k+1)! by Horner.
        let n = x.rows();
        let id = Mat::identity(n);
        let mut acc = id.clone();
        for k in (1..SERIES_TERMS).rev() {
            acc = &id + &x.matmul(&acc).scale(T::from_f64(1.0 / (k as f64 + 1.0)));
        }
        acc
    }

    pub fn u<T: Scalar>(&self, a: &[T]) -> Mat<T> {
        Self::series(&(-&self.ad(a)))
    }

    pub fn ubar<T: Scalar>(&self, a: &[T]) -> Mat<T> {
        Self::series(&self.ad(a))
    }

    pub fn v<T: Scalar>(&self, a: &[T]) -> Result<Mat<T>> {
        self.u(a).try_inverse().map_err(|_| Error::SingularMatrix { context: "u(a) at chart boundary".into() })
    }

    pub fn vbar<T: Scalar>(&self, a: &[T]) -> Result<Mat<T>> {
        self.ubar(a)
            .try_inverse()
            .map_err(|_| Error::SingularMatrix { context: "ū(a) at chart boundary".into() })
    }

    pub fn rho<T: Scalar>(&self, a: &[T]) -> Mat<T> {
        self.ad(a).exp()
    }

    pub fn rho_bar<T: Scalar>(&self, a: &[T]) -> Mat<T> {
        self.rho(&self.inverse(a))
    }

    pub fn maurer_cartan<T: Scalar>(&self, a: &[T]) -> Result<GroupMatrices<T>> {
        let u = self.u(a);
        let ubar = self.ubar(a);
        let v = u.try_inverse().map_err(|_| Error::SingularMatrix { context: "u(a)".into() })?;
        let vbar = ubar.try_inverse().map_err(|_| Error::SingularMatrix { context: "ū(a)".into() })?;
        Ok(GroupMatrices { u, ubar, v, vbar, rho: self.rho(a), rho_bar: self.rho_bar(a) })
    }

    /// `L_α φ = v^ν_α ∂φ/∂a^ν`, derivative taken with dual numbers.
    pub fn left_invariant_apply<T, F>(&self, a: &[T], phi: F) -> Result<Vec<T>>
    where
        T: Scalar,
        F: Fn(&[Dual<T>]) -> Dual<T>,
    {
        let grad = dual::gradient(a, phi);
        Ok(self.v(a)?.vecmat(&grad))
    }

    /// Same as [`left_invariant_apply`](Self::left_invariant_apply) but with
    /// fourth-order central differences, for non-generic scalar fields.
    pub fn left_invariant_apply_fd<F>(&self, a: &[f64], phi: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> f64,
    {
        let grad = crate::fd::gradient(a, crate::fd::STEP, phi);
        Ok(self.v(a)?.vecmat(&grad))
    }
}
