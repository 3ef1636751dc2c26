//! Mechanical systems on `P × V` with a free isometric group action.
//!
//! A system supplies its smooth data as evaluators generic over the scalar
//! type, so derivatives of every map come from dual numbers.

pub mod config;
pub mod expr;
pub mod so3_warped;
mod validate;

pub use config::{AnySystem, SystemSpec};
pub use so3_warped::So3Warped;
pub use validate::{validate, Bound, Check, ValidationReport};

use crate::dual::{self, Dual};
use crate::error::{Error, Result};
use crate::lie_group::LieGroup;
use crate::linalg::Mat;
use crate::sampling::SampleBox;
use crate::scalar::Scalar;

pub trait MechanicalSystem: Send + Sync {
    fn name(&self) -> &str;
    fn group(&self) -> &LieGroup;
    fn dim_p(&self) -> usize;
    fn dim_v(&self) -> usize;
    /// Constant metric `G_mn` on `V`.
    fn metric_v(&self) -> &Mat<f64>;
    /// Generators `J̄_α` of the right representation `D̄(a) = exp(a^α J̄_α)`.
    fn rep_generators(&self) -> &[Mat<f64>];
    fn sample_box(&self) -> &SampleBox;

    fn metric_p<T: Scalar>(&self, q: &[T]) -> Mat<T>;
    /// Right action `F(Q, a)`.
    fn action<T: Scalar>(&self, q: &[T], a: &[T]) -> Result<Vec<T>>;
    fn potential<T: Scalar>(&self, q: &[T], f: &[T]) -> T;
    /// Gauge functions `χ^α(Q)`.
    fn gauge<T: Scalar>(&self, q: &[T]) -> Vec<T>;

    /// `K^A_α = ∂F^A/∂a^α` at the identity; columns are indexed by `α`.
    fn killing_p<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>> {
        killing_p_from_action(self, q)
    }

    fn dim_ext(&self) -> usize {
        self.dim_p() + self.dim_v()
    }
}

/// Killing matrix obtained by differentiating the action at the identity.
pub fn killing_p_from_action<S: MechanicalSystem + ?Sized, T: Scalar>(sys: &S, q: &[T]) -> Result<Mat<T>> {
    let n = sys.group().dim();
    let qd = dual::constants(q);
    let e = vec![T::zero(); n];
    let mut k = Mat::zeros(q.len(), n);
    for alpha in 0..n {
        let col = sys.action::<Dual<T>>(&qd, &dual::seed(&e, alpha))?;
        for (i, c) in col.iter().enumerate() {
            k[(i, alpha)] = c.eps;
        }
    }
    Ok(k)
}

/// `K^n_α(f) = (J̄_α)^n_m f^m`.
pub fn killing_v<S: MechanicalSystem + ?Sized, T: Scalar>(sys: &S, f: &[T]) -> Mat<T> {
    let gens = sys.rep_generators();
    let cols: Vec<Vec<T>> = gens.iter().map(|j| Mat::lift(j).matvec(f)).collect();
    Mat::from_fn(f.len(), gens.len(), |n, a| cols[a][n])
}

/// Stacked Killing matrix on `P × V`.
pub fn killing_ext<S: MechanicalSystem, T: Scalar>(sys: &S, q: &[T], f: &[T]) -> Result<Mat<T>> {
    Ok(Mat::vstack(&sys.killing_p(q)?, &killing_v(sys, f)))
}

pub fn metric_ext<S: MechanicalSystem, T: Scalar>(sys: &S, q: &[T]) -> Mat<T> {
    Mat::block_diag(&sys.metric_p(q), &Mat::lift(sys.metric_v()))
}

fn generator_sum<S: MechanicalSystem + ?Sized, T: Scalar>(sys: &S, a: &[T]) -> Mat<T> {
    let n = sys.dim_v();
    let mut m = Mat::zeros(n, n);
    for (j, &x) in sys.rep_generators().iter().zip(a) {
        m = &m + &Mat::lift(j).scale(x);
    }
    m
}

/// `D̄(a)`, acting on `f` in the right action `(Q, f) ↦ (F(Q,a), D̄(a) f)`.
pub fn rep_bar<S: MechanicalSystem + ?Sized, T: Scalar>(sys: &S, a: &[T]) -> Mat<T> {
    generator_sum(sys, a).exp()
}

/// `D(a) = D̄(a^{-1})`.
pub fn rep<S: MechanicalSystem + ?Sized, T: Scalar>(sys: &S, a: &[T]) -> Mat<T> {
    (-&generator_sum(sys, a)).exp()
}

/// Jacobian `F^B_A = ∂F^B/∂Q^A` at `(Q, a)`, row `B`, column `A`.
pub fn action_jacobian<S: MechanicalSystem, T: Scalar>(sys: &S, q: &[T], a: &[T]) -> Result<Mat<T>> {
    let ad = dual::constants(a);
    let n = q.len();
    let mut j = Mat::zeros(n, n);
    for k in 0..n {
        let col = sys.action::<Dual<T>>(&dual::seed(q, k), &ad)?;
        for (i, c) in col.iter().enumerate() {
            j[(i, k)] = c.eps;
        }
    }
    Ok(j)
}

/// Gauge gradient `χ^μ_A`, row `μ`, column `A`.
pub fn gauge_jacobian<S: MechanicalSystem, T: Scalar>(sys: &S, q: &[T]) -> Mat<T> {
    let rows = dual::jacobian(q, |x| sys.gauge(x));
    Mat::from_rows(&rows)
}

/// Rank check of `K^A_α`: fails with `DegenerateOrbit` when the action is not free.
pub fn check_free(k: &Mat<f64>) -> Result<()> {
    let sv = k.to_nalgebra().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > 1e-10 * max.max(1.0)).count();
    if rank < k.cols() {
        Err(Error::DegenerateOrbit { rank, dim: k.cols() })
    } else {
        Ok(())
    }
}

/// Killing matrix with the freeness check applied.
pub fn killing_p_checked<S: MechanicalSystem>(sys: &S, q: &[f64]) -> Result<Mat<f64>> {
    let k = sys.killing_p(q)?;
    check_free(&k)?;
    Ok(k)
}
