//! Gauge slice `Σ = {χ(Q) = 0}`: adapted coordinates `(Q*, f̃, a)` and the
//! projector family built from the Faddeev–Popov matrix.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::dual::{self, Dual};
use crate::error::{Error, Result};
use crate::linalg::{vsub, Mat};
use crate::scalar::{max_abs, Scalar};
use crate::system::{gauge_jacobian, killing_v, rep, rep_bar, MechanicalSystem};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        GaugeOptions { tol: 1e-12, max_iter: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptedPoint {
    pub q_star: Vec<f64>,
    pub f_tilde: Vec<f64>,
    pub a: Vec<f64>,
}

/// Faddeev–Popov matrix `Φ^β_μ = χ^β_A K^A_μ` (row `β`, column `μ`).
pub fn faddeev_popov<S: MechanicalSystem, T: Scalar>(sys: &S, q: &[T]) -> Result<Mat<T>> {
    Ok(gauge_jacobian(sys, q).matmul(&sys.killing_p(q)?))
}

/// Solve `χ(F(Q, a^{-1})) = 0` for `a` by damped Newton iteration with the
/// Faddeev–Popov matrix as Jacobian.
///
/// Generic in the scalar so that derivatives of `a(Q)` come out of dual
/// inputs; for duals the iteration continues two sweeps past convergence of
/// the real part so the tangent parts settle too.
pub fn solve_gauge<S: MechanicalSystem, T: Scalar>(
    sys: &S,
    q: &[T],
    guess: Option<&[T]>,
    opts: &GaugeOptions,
) -> Result<Vec<T>> {
    let g = sys.group();
    let mut a: Vec<T> = guess.map(|x| x.to_vec()).unwrap_or_else(|| g.identity());
    let residual_at = |a: &[T]| -> Result<(Vec<T>, Vec<T>)> {
        let moved = sys.action(q, &g.inverse(a))?;
        let r = sys.gauge(&moved);
        Ok((moved, r))
    };
    let (mut moved, mut r) = residual_at(&a)?;
    let mut res = max_abs(&r);
    let mut extra = 0;
    for it in 0..opts.max_iter {
        if res < opts.tol {
            if extra >= 2 || !needs_tangent_sweeps::<T>() {
                debug!("gauge solve converged in {it} iterations, residual {res:.2e}");
                return Ok(a);
            }
            extra += 1;
        }
        let phi = faddeev_popov(sys, &moved)?;
        let delta = phi.solve(&r).map_err(|_| Error::SingularFaddeevPopov)?;
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let scaled: Vec<T> = delta.iter().map(|&d| d * step).collect();
            if let Ok(candidate) = g.multiply(&scaled, &a) {
                if let Ok((m, rc)) = residual_at(&candidate) {
                    let rn = max_abs(&rc);
                    if rn < res || rn < opts.tol {
                        a = candidate;
                        moved = m;
                        r = rc;
                        res = rn;
                        accepted = true;
                        break;
                    }
                }
            }
            step = step * T::from_f64(0.5);
        }
        if !accepted {
            if res < opts.tol {
                return Ok(a);
            }
            return Err(Error::NoConvergence { iterations: it + 1, residual: res });
        }
    }
    if res < opts.tol {
        return Ok(a);
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: res })
}

fn needs_tangent_sweeps<T: Scalar>() -> bool {
    // Plain floats carry no tangent part.
    std::any::TypeId::of::<T>() != std::any::TypeId::of::<f64>()
        && std::any::TypeId::of::<T>() != std::any::TypeId::of::<f32>()
}

/// `(Q, f) ↦ (Q*, f̃, a)` with `Q* = F(Q, a^{-1})`, `f̃ = D(a) f`.
pub fn decompose<S: MechanicalSystem>(
    sys: &S,
    q: &[f64],
    f: &[f64],
    guess: Option<&[f64]>,
    opts: &GaugeOptions,
) -> Result<AdaptedPoint> {
    let (q_star, f_tilde, a) = decompose_generic(sys, q, f, guess, opts)?;
    Ok(AdaptedPoint { q_star, f_tilde, a })
}

pub fn decompose_generic<S: MechanicalSystem, T: Scalar>(
    sys: &S,
    q: &[T],
    f: &[T],
    guess: Option<&[T]>,
    opts: &GaugeOptions,
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let g = sys.group();
    let a = solve_gauge(sys, q, guess, opts)?;
    let q_star = sys.action(q, &g.inverse(&a))?;
    let f_tilde = rep(sys, &a).matvec(f);
    Ok((q_star, f_tilde, a))
}

/// `(Q*, f̃, a) ↦ (F(Q*, a), D̄(a) f̃)`.
pub fn compose<S: MechanicalSystem>(sys: &S, p: &AdaptedPoint) -> Result<(Vec<f64>, Vec<f64>)> {
    sys.group().check_chart(&p.a)?;
    let q = sys.action(&p.q_star, &p.a)?;
    let f = rep_bar(sys, &p.a).matvec(&p.f_tilde);
    Ok((q, f))
}

/// Pointwise projector family at `(Q*, f̃)`.
#[derive(Clone, Debug)]
pub struct ProjectorSet<T: Scalar> {
    pub g_p: Mat<T>,
    pub g_p_inv: Mat<T>,
    pub g_ext: Mat<T>,
    pub k_p: Mat<T>,
    pub k_v: Mat<T>,
    pub k_ext: Mat<T>,
    /// `χ^μ_A`.
    pub chi: Mat<T>,
    pub phi: Mat<T>,
    pub phi_inv: Mat<T>,
    /// `Λ^α_A = (Φ^{-1})^α_μ χ^μ_A`.
    pub lambda: Mat<T>,
    /// `N^A_C` on the `P` block.
    pub n_pp: Mat<T>,
    /// `N^m_A`.
    pub n_vp: Mat<T>,
    /// Full `N^Ã_B̃`.
    pub n_ext: Mat<T>,
    /// `(χ^⊤)^A_μ = G^{AB} γ_{μν} χ^ν_B`.
    pub chi_top: Mat<T>,
    pub p_perp: Mat<T>,
    pub gamma: Mat<T>,
    pub gamma_v: Mat<T>,
    pub d: Mat<T>,
    pub d_inv: Mat<T>,
    /// `Π^Ã_B̃ = δ − K^Ã_α d^{αβ} K^C̃_β G_C̃B̃`.
    pub pi: Mat<T>,
}

/// Symmetric solve for an inverse, symmetrized afterwards.
pub fn symmetric_inverse<T: Scalar>(m: &Mat<T>) -> Result<Mat<T>> {
    Ok(m.symmetrize().try_inverse()?.symmetrize())
}

impl<T: Scalar> ProjectorSet<T> {
    pub fn new<S: MechanicalSystem>(sys: &S, q_star: &[T], f_tilde: &[T]) -> Result<Self> {
        let np = sys.dim_p();
        let nv = sys.dim_v();
        let g_p = sys.metric_p(q_star);
        let g_p_inv = symmetric_inverse(&g_p)
            .map_err(|_| Error::SingularMetric { context: "G_AB at Q*".into() })?;
        let g_v = Mat::lift(sys.metric_v());
        let g_ext = Mat::block_diag(&g_p, &g_v);
        let k_p = sys.killing_p(q_star)?;
        let k_v = killing_v(sys, f_tilde);
        let k_ext = Mat::vstack(&k_p, &k_v);
        let chi = gauge_jacobian(sys, q_star);
        let phi = chi.matmul(&k_p);
        let phi_inv = phi.try_inverse().map_err(|_| Error::SingularFaddeevPopov)?;
        let lambda = phi_inv.matmul(&chi);
        let n_pp = &Mat::identity(np) - &k_p.matmul(&lambda);
        let n_vp = -&k_v.matmul(&lambda);
        let mut n_ext = Mat::identity(np + nv);
        n_ext.set_block(0, 0, &n_pp);
        n_ext.set_block(np, 0, &n_vp);
        let gamma = k_p.transpose().matmul(&g_p).matmul(&k_p);
        let gamma_v = k_v.transpose().matmul(&g_v).matmul(&k_v);
        let d = (&gamma + &gamma_v).symmetrize();
        let d_inv = symmetric_inverse(&d).map_err(|_| Error::SingularOrbitMetric)?;
        let chi_top = g_p_inv.matmul(&chi.transpose()).matmul(&gamma);
        let m = chi.matmul(&chi_top);
        let m_inv = m.try_inverse().map_err(|_| Error::SingularFaddeevPopov)?;
        let p_perp = &Mat::identity(np) - &chi_top.matmul(&m_inv).matmul(&chi);
        let pi = &Mat::identity(np + nv) - &k_ext.matmul(&d_inv).matmul(&k_ext.transpose()).matmul(&g_ext);
        Ok(ProjectorSet {
            g_p,
            g_p_inv,
            g_ext,
            k_p,
            k_v,
            k_ext,
            chi,
            phi,
            phi_inv,
            lambda,
            n_pp,
            n_vp,
            n_ext,
            chi_top,
            p_perp,
            gamma,
            gamma_v,
            d,
            d_inv,
            pi,
        })
    }

    pub fn dim_p(&self) -> usize {
        self.n_pp.rows()
    }

    pub fn dim_ext(&self) -> usize {
        self.n_ext.rows()
    }

    /// Apply the dependent-derivative rule to an ambient gradient:
    /// `X_{,A} = (P⊥)^D_A ∂_D X`.
    pub fn dependent_gradient(&self, ambient: &[T]) -> Vec<T> {
        self.p_perp.vecmat(ambient)
    }

    /// Residuals of every projector identity.
    pub fn residuals(&self) -> ProjectorResiduals {
        let np = self.dim_p();
        let n = self.dim_ext();
        let id = Mat::<T>::identity(self.d.rows());
        let n_p = &self.n_pp;
        let pp = &self.p_perp;
        let d_eigs = self.d.re().symmetrize().to_nalgebra().symmetric_eigen().eigenvalues;
        let rank = {
            let sv = n_p.re().to_nalgebra().singular_values();
            sv.iter().filter(|&&s| s > 1e-8).count()
        };
        ProjectorResiduals {
            n_idempotent: n_p.matmul(n_p).max_abs_diff(n_p),
            n_ext_idempotent: self.n_ext.matmul(&self.n_ext).max_abs_diff(&self.n_ext),
            p_perp_idempotent: pp.matmul(pp).max_abs_diff(pp),
            // (P⊥)^A_B N^C_A = (P⊥)^C_B, i.e. N P⊥ = P⊥
            p_perp_n: n_p.matmul(pp).max_abs_diff(pp),
            // N^A_B (P⊥)^C_A = N^C_B, i.e. P⊥ N = N
            n_p_perp: pp.matmul(n_p).max_abs_diff(n_p),
            n_killing: n_p.matmul(&self.k_p).max_abs(),
            n_ext_killing: self.n_ext.matmul(&self.k_ext).max_abs(),
            chi_n: self.chi.matmul(n_p).max_abs(),
            pi_killing: self.pi.matmul(&self.k_ext).max_abs(),
            n_pi: self.n_ext.matmul(&self.pi).max_abs_diff(&self.n_ext),
            pi_n: self.pi.matmul(&self.n_ext).max_abs_diff(&self.pi),
            pi_idempotent: self.pi.matmul(&self.pi).max_abs_diff(&self.pi),
            d_symmetric: self.d.max_abs_diff(&self.d.transpose()),
            d_inverse: self.d.matmul(&self.d_inv).max_abs_diff(&id),
            d_min_eigenvalue: d_eigs.iter().cloned().fold(f64::INFINITY, f64::min),
            n_rank: rank,
            n_expected_rank: np - self.d.rows(),
            ext_dim: n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorResiduals {
    pub n_idempotent: f64,
    pub n_ext_idempotent: f64,
    pub p_perp_idempotent: f64,
    pub p_perp_n: f64,
    pub n_p_perp: f64,
    pub n_killing: f64,
    pub n_ext_killing: f64,
    pub chi_n: f64,
    pub pi_killing: f64,
    pub n_pi: f64,
    pub pi_n: f64,
    pub pi_idempotent: f64,
    pub d_symmetric: f64,
    pub d_inverse: f64,
    pub d_min_eigenvalue: f64,
    pub n_rank: usize,
    pub n_expected_rank: usize,
    pub ext_dim: usize,
}

impl ProjectorResiduals {
    /// Largest of the algebraic residuals (everything that should vanish).
    pub fn max_algebraic(&self) -> f64 {
        [
            self.n_idempotent,
            self.n_ext_idempotent,
            self.p_perp_idempotent,
            self.p_perp_n,
            self.n_p_perp,
            self.n_killing,
            self.n_ext_killing,
            self.chi_n,
            self.pi_killing,
            self.n_pi,
            self.pi_n,
            self.pi_idempotent,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn projectors<S: MechanicalSystem>(sys: &S, q_star: &[f64], f_tilde: &[f64]) -> Result<ProjectorSet<f64>> {
    ProjectorSet::new(sys, q_star, f_tilde)
}

/// `∂φ/∂Q*^A` by the dependent-derivative rule, with the ambient gradient
/// taken by dual numbers.
pub fn dependent_derivative<S, F>(sys: &S, q_star: &[f64], f_tilde: &[f64], phi: F) -> Result<Vec<f64>>
where
    S: MechanicalSystem,
    F: Fn(&[Dual<f64>]) -> Dual<f64>,
{
    let ps = ProjectorSet::new(sys, q_star, f_tilde)?;
    Ok(ps.dependent_gradient(&dual::gradient(q_star, phi)))
}

/// Gauge residual `‖χ(Q*)‖∞`.
pub fn gauge_residual<S: MechanicalSystem>(sys: &S, q_star: &[f64]) -> f64 {
    max_abs(&sys.gauge(q_star))
}

/// Project a point back onto `Σ` along its orbit (used for constraint
/// stabilization): returns the new `Q*` and the group element removed.
pub fn reproject<S: MechanicalSystem>(
    sys: &S,
    q_star: &[f64],
    opts: &GaugeOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let b = solve_gauge(sys, q_star, None, opts)?;
    let moved = sys.action(q_star, &sys.group().inverse(&b))?;
    debug!("re-projected onto the slice, shift {:.2e}", max_abs(&vsub(&moved, q_star)));
    Ok((moved, b))
}
