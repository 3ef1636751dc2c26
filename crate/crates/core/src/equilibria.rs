//! Relative equilibria: shape points where the amended potential is
//! stationary along the slice, with `p` along an eigenvector of `d^{μσ}`.

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::connection::GeometryCache;
use crate::dual::{self, Dual};
use crate::dynamics::{integrate, IntegrateOptions, ReducedState};
use crate::error::{Error, Result};
use crate::gauge::{reproject, GaugeOptions, ProjectorSet};
use crate::lie_group::LieGroup;
use crate::linalg::{max_abs_diff, Mat};
use crate::scalar::{max_abs, Scalar};
use crate::system::MechanicalSystem;

/// Eigenvalues closer than this (relative) are treated as one eigenspace.
const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub p: Vec<f64>,
    pub eigenvalue: f64,
    /// `max_β |c^ν_{μβ} d^{μσ} p_σ p_ν|`.
    pub residual: f64,
}

/// `c^ν_{μβ} d^{μσ} p_σ p_ν` for every `β`.
pub fn vertical_residual<T: Scalar>(g: &LieGroup, d_inv: &Mat<T>, p: &[T]) -> Vec<T> {
    let up = d_inv.matvec(p);
    let n = g.dim();
    (0..n)
        .map(|beta| {
            let mut s = T::zero();
            for nu in 0..n {
                for mu in 0..n {
                    let c = g.c(nu, mu, beta);
                    if c != 0.0 {
                        s += T::from_f64(c) * up[mu] * p[nu];
                    }
                }
            }
            s
        })
        .collect()
}

/// Orthonormal eigenbasis of a symmetric matrix ordered by eigenvalue.
/// Inside a repeated eigenvalue the basis is obtained by Gram–Schmidt on the
/// projected coordinate axes, so an isotropic matrix yields the canonical
/// basis. Each vector's first significant component is positive.
pub fn ordered_eigenbasis(m: &Mat<f64>) -> Vec<(f64, Vec<f64>)> {
    let n = m.rows();
    let eig = m.symmetrize().to_nalgebra().symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<f64>)> =
        (0..n).map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = pairs.iter().map(|p| p.0.abs()).fold(1e-300, f64::max);
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && (pairs[j].0 - pairs[i].0).abs() <= TIE_TOL * scale {
            j += 1;
        }
        if j - i > 1 {
            debug!("eigenvalue {:.6e} repeated {} times; using canonical ordering", pairs[i].0, j - i);
        }
        let space: Vec<&Vec<f64>> = pairs[i..j].iter().map(|p| &p.1).collect();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for axis in 0..n {
            if basis.len() == space.len() {
                break;
            }
            // projection of e_axis onto the eigenspace
            let mut v = vec![0.0; n];
            for e in &space {
                for k in 0..n {
                    v[k] += e[axis] * e[k];
                }
            }
            for b in &basis {
                let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for k in 0..n {
                    v[k] -= c * b[k];
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                basis.push(v.iter().map(|x| x / norm).collect());
            }
        }
        let lambda = pairs[i..j].iter().map(|p| p.0).sum::<f64>() / (j - i) as f64;
        for mut v in basis {
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-12).copied() {
                if first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            out.push((lambda, v));
        }
        i = j;
    }
    out
}

/// Candidate vertical momenta: eigenvectors of `d^{μσ}` scaled to `magnitude`.
pub fn candidates_from_inverse(g: &LieGroup, d_inv: &Mat<f64>, magnitude: f64) -> Vec<Candidate> {
    ordered_eigenbasis(d_inv)
        .into_iter()
        .map(|(lambda, v)| {
            let p: Vec<f64> = v.iter().map(|x| x * magnitude).collect();
            let residual = max_abs(&vertical_residual(g, d_inv, &p));
            Candidate { p, eigenvalue: lambda, residual }
        })
        .collect()
}

pub fn vertical_candidates<S: MechanicalSystem>(
    sys: &S,
    q_star: &[f64],
    f_tilde: &[f64],
    magnitude: f64,
) -> Result<Vec<Candidate>> {
    let ps = ProjectorSet::new(sys, q_star, f_tilde)?;
    let c = candidates_from_inverse(sys.group(), &ps.d_inv, magnitude);
    for x in &c {
        if x.residual > 1e-10 * magnitude.powi(2).max(1.0) {
            warn!("eigen candidate misses the vertical equation by {:.2e}", x.residual);
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub gauge: GaugeOptions,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions { tol: 1e-10, max_iter: 100, gauge: GaugeOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResiduals {
    /// `N^R_B (½ 𝒟_R d^{κσ} p_κ p_σ + V_{,R})`.
    pub horizontal_p: f64,
    /// `½ 𝒟_m d^{κσ} p_κ p_σ + V_{,m}`.
    pub horizontal_v: f64,
    pub vertical: f64,
    pub gauge: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub t_end: f64,
    pub dt: f64,
    /// `max_t ‖(Q*, f̃)(t) − (Q*, f̃)(0)‖∞`.
    pub shape_drift: f64,
    pub momentum_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeEquilibrium {
    pub q_star: Vec<f64>,
    pub f_tilde: Vec<f64>,
    pub p: Vec<f64>,
    pub p_magnitude: f64,
    pub eigen_index: usize,
    pub eigenvalue: f64,
    pub iterations: usize,
    pub residuals: EquilibriumResiduals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}

/// Stacked residual `(N_PPᵀ (1)_P, (2), χ)` at fixed `p`.
fn residual_map<S: MechanicalSystem, T: Scalar>(sys: &S, x: &[T], p: &[T]) -> Result<Vec<T>> {
    let np = sys.dim_p();
    let gc = GeometryCache::new(sys, &x[..np], &x[np..])?;
    Ok(stacked(sys, &gc, p))
}

fn stacked<S: MechanicalSystem, T: Scalar>(sys: &S, gc: &GeometryCache<T>, p: &[T]) -> Vec<T> {
    let np = sys.dim_p();
    let amended = gc.amended_gradient(p);
    let mut r = gc.ps.n_pp.transpose().matvec(&amended[..np]);
    r.extend_from_slice(&amended[np..]);
    r.extend(sys.gauge(&gc.q_star));
    r
}

fn pick(cands: &[Candidate], index: usize) -> Result<&Candidate> {
    cands
        .get(index)
        .ok_or_else(|| Error::Precondition(format!("eigen_index {index} out of range (group dimension {})", cands.len())))
}

/// Gauss–Newton with an SVD pseudo-inverse on the stacked residual; `p` is
/// refreshed from the eigenvectors of `d^{μσ}` at every iterate and held
/// fixed inside each Jacobian.
pub fn solve_equilibrium<S: MechanicalSystem>(
    sys: &S,
    q_seed: &[f64],
    f_seed: &[f64],
    p_magnitude: f64,
    eigen_index: usize,
    opts: &EquilibriumOptions,
) -> Result<RelativeEquilibrium> {
    let np = sys.dim_p();
    let (q0, _) = reproject(sys, q_seed, &opts.gauge)?;
    let mut x: Vec<f64> = q0.iter().chain(f_seed).copied().collect();
    let momentum = |x: &[f64]| -> Result<Candidate> {
        let c = vertical_candidates(sys, &x[..np], &x[np..], p_magnitude)?;
        Ok(pick(&c, eigen_index)?.clone())
    };
    let mut cand = momentum(&x)?;
    let mut r = residual_map(sys, &x, &cand.p)?;
    let mut res = max_abs(&r);
    let mut iterations = 0;
    while res > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { iterations, residual: res });
        }
        iterations += 1;
        let pd = dual::constants(&cand.p);
        let jac = dual::jacobian(&x, |z: &[Dual<f64>]| {
            residual_map(sys, z, &pd).unwrap_or_else(|_| vec![Dual::constant(f64::NAN); r.len()])
        });
        let jac = Mat::from_rows(&jac);
        if !jac.is_finite() {
            return Err(Error::SingularJacobian);
        }
        let svd = jac.to_nalgebra().svd(true, true);
        let rhs = nalgebra::DVector::from_vec(r.clone());
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let step = svd.solve(&rhs, 1e-12 * smax.max(1e-300)).map_err(|_| Error::SingularJacobian)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a - lambda * b).collect();
            let attempt = (|| -> Result<(Candidate, Vec<f64>)> {
                let c = momentum(&trial)?;
                let rr = residual_map(sys, &trial, &c.p)?;
                Ok((c, rr))
            })();
            if let Ok((c, rr)) = attempt {
                let rn = max_abs(&rr);
                if rn < res || rn <= opts.tol {
                    x = trial;
                    cand = c;
                    r = rr;
                    res = rn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations, residual: res });
        }
        debug!("equilibrium iteration {iterations}: residual {res:.3e}");
    }
    info!("relative equilibrium after {iterations} iterations, residual {res:.3e}");
    let residuals = equilibrium_residuals(sys, &x[..np], &x[np..], &cand.p)?;
    Ok(RelativeEquilibrium {
        q_star: x[..np].to_vec(),
        f_tilde: x[np..].to_vec(),
        p: cand.p,
        p_magnitude,
        eigen_index,
        eigenvalue: cand.eigenvalue,
        iterations,
        residuals,
        verification: None,
    })
}

pub fn equilibrium_residuals<S: MechanicalSystem>(
    sys: &S,
    q_star: &[f64],
    f_tilde: &[f64],
    p: &[f64],
) -> Result<EquilibriumResiduals> {
    let np = sys.dim_p();
    let gc = GeometryCache::new(sys, q_star, f_tilde)?;
    let r = stacked(sys, &gc, p);
    Ok(EquilibriumResiduals {
        horizontal_p: max_abs(&r[..np]),
        horizontal_v: max_abs(&r[np..np + sys.dim_v()]),
        vertical: max_abs(&vertical_residual(sys.group(), &gc.ps.d_inv, p)),
        gauge: max_abs(&r[np + sys.dim_v()..]),
    })
}

/// Integrate the reduced system from the equilibrium at rest in shape and
/// record how far the shape moves.
pub fn verify<S: MechanicalSystem>(sys: &S, eq: &RelativeEquilibrium, t_end: f64, dt: f64) -> Result<Verification> {
    let ng = sys.group().dim();
    let s = ReducedState {
        q_star: eq.q_star.clone(),
        f_tilde: eq.f_tilde.clone(),
        omega_p: vec![0.0; sys.dim_p()],
        omega_v: vec![0.0; sys.dim_v()],
        p: eq.p.clone(),
        a: vec![0.0; ng],
    };
    let traj = integrate(sys, &s, &IntegrateOptions::new(dt, t_end))?;
    if let Some(f) = &traj.failure {
        return Err(Error::Precondition(format!("verification run failed: {f}")));
    }
    let shape_drift = traj
        .states
        .iter()
        .map(|x| max_abs_diff(&x.q_star, &s.q_star).max(max_abs_diff(&x.f_tilde, &s.f_tilde)))
        .fold(0.0, f64::max);
    let momentum_drift = traj.states.iter().map(|x| max_abs_diff(&x.p, &s.p)).fold(0.0, f64::max);
    Ok(Verification { t_end, dt, shape_drift, momentum_drift })
}
