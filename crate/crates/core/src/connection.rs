//! Mechanical connection on `Σ × V` and the coefficient fields of the reduced
//! equations: gauge potentials, curvature, horizontal metric with its
//! pseudoinverse, Christoffel symbols and covariant derivatives of `d`.
//!
//! Everything here is section-valued (no group dependence). The `ρ̄`-dressed
//! variants are available through the `*_tilde` helpers.
//!
//! Comma derivatives with respect to `Q*` always follow the dependent
//! derivative rule `X_{,A} = (P⊥)^D_A ∂_D X`; derivatives with respect to `f̃`
//! are plain partials. Extended indices run over `Q*` first, then `f̃`.

use serde::Serialize;

use crate::dual::{self, Dual};
use crate::error::Result;
use crate::gauge::{symmetric_inverse, ProjectorSet};
use crate::lie_group::LieGroup;
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::system::{gauge_jacobian, MechanicalSystem};

/// `𝒜^α_Ã = d^{αβ} K^B̃_β G_B̃Ã`, row `α`.
pub fn potentials<T: Scalar>(ps: &ProjectorSet<T>) -> Mat<T> {
    ps.d_inv.matmul(&ps.k_ext.transpose()).matmul(&ps.g_ext)
}

/// `Gᴴ = G − G K d⁻¹ Kᵀ G` on the extended index range.
pub fn horizontal_metric<T: Scalar>(ps: &ProjectorSet<T>) -> Mat<T> {
    let gk = ps.g_ext.matmul(&ps.k_ext);
    (&ps.g_ext - &gk.matmul(&ps.d_inv).matmul(&gk.transpose())).symmetrize()
}

/// Pseudoinverse `Ǧ = N G⁻¹ Nᵀ` of the horizontal metric; its `Q*` block is
/// `G^{EF} N^A_E N^B_F`.
pub fn pseudo_inverse<T: Scalar>(ps: &ProjectorSet<T>) -> Result<Mat<T>> {
    let np = ps.dim_p();
    let nv = ps.dim_ext() - np;
    let gv_inv = symmetric_inverse(&ps.g_ext.block(np, np, nv, nv))?;
    let g_inv = Mat::block_diag(&ps.g_p_inv, &gv_inv);
    Ok(ps.n_ext.matmul(&g_inv).matmul(&ps.n_ext.transpose()).symmetrize())
}

/// Evaluated geometry at one point `(Q*, f̃)` of the slice.
#[derive(Clone, Debug)]
pub struct GeometryCache<T: Scalar> {
    pub q_star: Vec<T>,
    pub f_tilde: Vec<T>,
    pub ps: ProjectorSet<T>,
    /// `𝒜^α_Ã`, row `α`.
    pub potentials: Mat<T>,
    pub g_h: Mat<T>,
    pub g_check: Mat<T>,
    pub potential_value: T,
    /// `V_{,R̃}`.
    pub grad_v: Vec<T>,
    /// Comma derivatives, one matrix per derivative coordinate.
    pub d_potentials: Vec<Mat<T>>,
    pub d_g_h: Vec<Mat<T>>,
    pub d_orbit: Vec<Mat<T>>,
    pub d_orbit_inv: Vec<Mat<T>>,
    /// Ambient second derivatives `χ^μ_{,AB}`, one matrix per `μ`.
    pub chi_hessian: Vec<Mat<T>>,
    /// `ℱ^α_{S̃P̃}`, one matrix per `α`.
    pub curvature: Vec<Mat<T>>,
    /// Lowered `ᴴΓ_{B̃M̃T̃}`, flat in `[b][m][t]` order.
    pub christoffel: Vec<T>,
    /// `𝒟_R̃ d_{μν}`.
    pub cov_d: Vec<Mat<T>>,
    /// `𝒟_R̃ d^{κσ} = −d^{κμ}(𝒟_R̃ d_{μν})d^{νσ}`.
    pub cov_d_inv: Vec<Mat<T>>,
}

fn eps<T: Scalar>(m: &Mat<Dual<T>>) -> Mat<T> {
    m.map_to(|x| x.eps)
}

impl<T: Scalar> GeometryCache<T> {
    pub fn new<S: MechanicalSystem>(sys: &S, q_star: &[T], f_tilde: &[T]) -> Result<Self> {
        let g = sys.group();
        let ng = g.dim();
        let np = q_star.len();
        let ps = ProjectorSet::new(sys, q_star, f_tilde)?;
        let n = ps.dim_ext();
        let pot = potentials(&ps);
        let g_h = horizontal_metric(&ps);
        let g_check = pseudo_inverse(&ps)?;

        let z: Vec<T> = q_star.iter().chain(f_tilde).copied().collect();
        let mut raw_pot = Vec::with_capacity(n);
        let mut raw_gh = Vec::with_capacity(n);
        let mut raw_d = Vec::with_capacity(n);
        let mut raw_dinv = Vec::with_capacity(n);
        for k in 0..n {
            let zd = dual::seed(&z, k);
            let psd = ProjectorSet::new(sys, &zd[..np], &zd[np..])?;
            raw_pot.push(eps(&potentials(&psd)));
            raw_gh.push(eps(&horizontal_metric(&psd)));
            raw_d.push(eps(&psd.d));
            raw_dinv.push(eps(&psd.d_inv));
        }
        let raw_grad = dual::gradient(&z, |x| sys.potential(&x[..np], &x[np..]));

        let mut chi_hessian = vec![Mat::zeros(np, np); ng];
        for k in 0..np {
            let dchi = eps(&gauge_jacobian(sys, &dual::seed(q_star, k)));
            for (mu, h) in chi_hessian.iter_mut().enumerate() {
                for a in 0..np {
                    h[(a, k)] = dchi[(mu, a)];
                }
            }
        }

        let pp = &ps.p_perp;
        let comma = |raw: &[Mat<T>]| -> Vec<Mat<T>> {
            (0..n)
                .map(|k| {
                    if k < np {
                        let mut acc = Mat::zeros(raw[0].rows(), raw[0].cols());
                        for (dd, r) in raw.iter().enumerate().take(np) {
                            acc = &acc + &r.scale(pp[(dd, k)]);
                        }
                        acc
                    } else {
                        raw[k].clone()
                    }
                })
                .collect()
        };
        let d_potentials = comma(&raw_pot);
        let d_g_h = comma(&raw_gh);
        let d_orbit = comma(&raw_d);
        let d_orbit_inv = comma(&raw_dinv);
        let mut grad_v = ps.dependent_gradient(&raw_grad[..np]);
        grad_v.extend_from_slice(&raw_grad[np..]);

        let curvature = curvature_from(g, &pot, &d_potentials);
        let mut christoffel = vec![T::zero(); n * n * n];
        let half = T::from_f64(0.5);
        for b in 0..n {
            for m in 0..n {
                for t in 0..n {
                    christoffel[(b * n + m) * n + t] =
                        half * (d_g_h[m][(b, t)] + d_g_h[b][(m, t)] - d_g_h[t][(b, m)]);
                }
            }
        }
        let cov_d: Vec<Mat<T>> = (0..n).map(|r| covariant_lower(g, &ps.d, &pot.col(r), &d_orbit[r])).collect();
        let cov_d_inv = cov_d.iter().map(|m| -&ps.d_inv.matmul(m).matmul(&ps.d_inv)).collect();

        Ok(GeometryCache {
            q_star: q_star.to_vec(),
            f_tilde: f_tilde.to_vec(),
            potential_value: sys.potential(q_star, f_tilde),
            ps,
            potentials: pot,
            g_h,
            g_check,
            grad_v,
            d_potentials,
            d_g_h,
            d_orbit,
            d_orbit_inv,
            chi_hessian,
            curvature,
            christoffel,
            cov_d,
            cov_d_inv,
        })
    }

    pub fn dim_p(&self) -> usize {
        self.q_star.len()
    }

    pub fn dim_ext(&self) -> usize {
        self.ps.dim_ext()
    }

    pub fn dim_g(&self) -> usize {
        self.potentials.rows()
    }

    pub fn christoffel_at(&self, b: usize, m: usize, t: usize) -> T {
        let n = self.dim_ext();
        self.christoffel[(b * n + m) * n + t]
    }

    /// `ᴴΓ_{B̃M̃T̃} ω^B̃ ω^M̃` for every `T̃`.
    pub fn christoffel_contract(&self, omega: &[T]) -> Vec<T> {
        let n = self.dim_ext();
        let mut out = vec![T::zero(); n];
        for b in 0..n {
            for m in 0..n {
                let w = omega[b] * omega[m];
                if w == T::zero() {
                    continue;
                }
                for (t, o) in out.iter_mut().enumerate() {
                    *o += self.christoffel_at(b, m, t) * w;
                }
            }
        }
        out
    }

    /// `ℱ^α_{Q̃T̃} ω^Q̃ p_α` for every `T̃`.
    pub fn magnetic(&self, omega: &[T], p: &[T]) -> Vec<T> {
        let n = self.dim_ext();
        let mut out = vec![T::zero(); n];
        for (alpha, f) in self.curvature.iter().enumerate() {
            let fw = f.vecmat(omega);
            for t in 0..n {
                out[t] += fw[t] * p[alpha];
            }
        }
        out
    }

    /// `½ (𝒟_R̃ d^{κσ}) p_κ p_σ + V_{,R̃}`, the amended-potential gradient.
    pub fn amended_gradient(&self, p: &[T]) -> Vec<T> {
        let half = T::from_f64(0.5);
        self.cov_d_inv
            .iter()
            .zip(&self.grad_v)
            .map(|(m, &dv)| half * m.bilinear(p, p) + dv)
            .collect()
    }

    /// `𝒟_R̃ d^{κσ}` from the explicit formula
    /// `∂d^{κσ} + c^σ_{αμ}𝒜^α d^{κμ} + c^κ_{αν}𝒜^α d^{νσ}`.
    pub fn cov_d_inv_explicit(&self, g: &LieGroup) -> Vec<Mat<T>> {
        let ng = self.dim_g();
        let di = &self.ps.d_inv;
        (0..self.dim_ext())
            .map(|r| {
                let a = self.potentials.col(r);
                Mat::from_fn(ng, ng, |kappa, sigma| {
                    let mut v = self.d_orbit_inv[r][(kappa, sigma)];
                    for alpha in 0..ng {
                        for mu in 0..ng {
                            let aw = a[alpha];
                            v += T::from_f64(g.c(sigma, alpha, mu)) * aw * di[(kappa, mu)];
                            v += T::from_f64(g.c(kappa, alpha, mu)) * aw * di[(mu, sigma)];
                        }
                    }
                    v
                })
            })
            .collect()
    }

    pub fn potentials_tilde(&self, rho_bar: &Mat<T>) -> Mat<T> {
        rho_bar.matmul(&self.potentials)
    }

    /// `ℱ̃^α = ρ̄^α_μ ℱ^μ`.
    pub fn curvature_tilde(&self, rho_bar: &Mat<T>) -> Vec<Mat<T>> {
        dress(rho_bar, &self.curvature)
    }

    /// Block-diagonal metric `(Gᴴ, d̃)` of the `H`/`L` basis, `d̃ = ρᵀ d ρ`.
    pub fn frame_metric(&self, rho: &Mat<T>) -> Mat<T> {
        Mat::block_diag(&self.g_h, &rho.transpose().matmul(&self.ps.d).matmul(rho))
    }

    /// Matching pseudoinverse `(Ǧ, d̃⁻¹)`.
    pub fn frame_pseudo_inverse(&self, rho: &Mat<T>) -> Result<Mat<T>> {
        let dt = rho.transpose().matmul(&self.ps.d).matmul(rho);
        Ok(Mat::block_diag(&self.g_check, &symmetric_inverse(&dt)?))
    }
}

fn dress<T: Scalar>(rho_bar: &Mat<T>, per_alpha: &[Mat<T>]) -> Vec<Mat<T>> {
    let ng = per_alpha.len();
    (0..ng)
        .map(|alpha| {
            let mut acc = Mat::zeros(per_alpha[0].rows(), per_alpha[0].cols());
            for (mu, f) in per_alpha.iter().enumerate() {
                acc = &acc + &f.scale(rho_bar[(alpha, mu)]);
            }
            acc
        })
        .collect()
}

/// `ℱ^α_{S̃P̃} = 𝒜^α_{P̃,S̃} − 𝒜^α_{S̃,P̃} + c^α_{νσ}𝒜^ν_S̃ 𝒜^σ_P̃`.
fn curvature_from<T: Scalar>(g: &LieGroup, pot: &Mat<T>, d_pot: &[Mat<T>]) -> Vec<Mat<T>> {
    let ng = g.dim();
    let n = pot.cols();
    (0..ng)
        .map(|alpha| {
            Mat::from_fn(n, n, |s, p| {
                let mut v = d_pot[s][(alpha, p)] - d_pot[p][(alpha, s)];
                for nu in 0..ng {
                    for sigma in 0..ng {
                        let c = g.c(alpha, nu, sigma);
                        if c != 0.0 {
                            v += T::from_f64(c) * pot[(nu, s)] * pot[(sigma, p)];
                        }
                    }
                }
                v
            })
        })
        .collect()
}

/// `𝒟 d_{μν} = ∂d_{μν} − c^σ_{αμ}𝒜^α d_{σν} − c^σ_{αν}𝒜^α d_{σμ}` along one
/// coordinate, given that coordinate's potential column.
fn covariant_lower<T: Scalar>(g: &LieGroup, d: &Mat<T>, a: &[T], dd: &Mat<T>) -> Mat<T> {
    let ng = g.dim();
    Mat::from_fn(ng, ng, |mu, nu| {
        let mut v = dd[(mu, nu)];
        for sigma in 0..ng {
            for alpha in 0..ng {
                let c1 = g.c(sigma, alpha, mu);
                let c2 = g.c(sigma, alpha, nu);
                v -= T::from_f64(c1) * a[alpha] * d[(sigma, nu)];
                v -= T::from_f64(c2) * a[alpha] * d[(sigma, mu)];
            }
        }
        v
    })
}

/// Residuals of the connection invariants at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryResiduals {
    /// `𝒜 K − I`.
    pub killing_pairing: f64,
    /// `𝒜 Π`.
    pub horizontal_annihilation: f64,
    /// `Gᴴ K`.
    pub horizontal_metric_kernel: f64,
    /// `Gᴴ − Πᵀ G Π`.
    pub horizontal_metric_definition: f64,
    /// `G^{EF} Gᴴ_{FR̃} − Π^E_R̃`.
    pub pi_contraction: f64,
    /// `Ǧ Gᴴ − N`.
    pub orthogonality: f64,
    pub curvature_antisymmetry: f64,
    pub christoffel_symmetry: f64,
    pub cov_d_symmetry: f64,
    /// `𝒟 d^{-1}` from the explicit formula against `−d⁻¹(𝒟d)d⁻¹`.
    pub inverse_derivative: f64,
    pub horizontal_metric_min_eigenvalue: f64,
}

impl GeometryResiduals {
    pub fn max_algebraic(&self) -> f64 {
        [
            self.killing_pairing,
            self.horizontal_annihilation,
            self.horizontal_metric_kernel,
            self.horizontal_metric_definition,
            self.pi_contraction,
            self.orthogonality,
            self.curvature_antisymmetry,
            self.christoffel_symmetry,
            self.cov_d_symmetry,
            self.inverse_derivative,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl GeometryCache<f64> {
    pub fn residuals(&self, g: &LieGroup) -> GeometryResiduals {
        let ps = &self.ps;
        let n = self.dim_ext();
        let np = self.dim_p();
        let ng = self.dim_g();
        let pairing = self.potentials.matmul(&ps.k_ext).max_abs_diff(&Mat::identity(ng));
        let ann = self.potentials.matmul(&ps.pi).max_abs();
        let kernel = self.g_h.matmul(&ps.k_ext).max_abs();
        let def = self.g_h.max_abs_diff(&ps.pi.transpose().matmul(&ps.g_ext).matmul(&ps.pi));
        let pi_c = ps
            .g_p_inv
            .matmul(&self.g_h.block(0, 0, np, n))
            .max_abs_diff(&ps.pi.block(0, 0, np, n));
        let ortho = self.g_check.matmul(&self.g_h).max_abs_diff(&ps.n_ext);
        let anti = self.curvature.iter().map(|f| (f + &f.transpose()).max_abs()).fold(0.0, f64::max);
        let mut chr = 0.0f64;
        for b in 0..n {
            for m in 0..n {
                for t in 0..n {
                    chr = chr.max((self.christoffel_at(b, m, t) - self.christoffel_at(m, b, t)).abs());
                }
            }
        }
        let covs = self
            .cov_d
            .iter()
            .chain(&self.cov_d_inv)
            .map(|m| m.max_abs_diff(&m.transpose()))
            .fold(0.0, f64::max);
        let inv = self
            .cov_d_inv_explicit(g)
            .iter()
            .zip(&self.cov_d_inv)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        let eig = self.g_h.to_nalgebra().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        GeometryResiduals {
            killing_pairing: pairing,
            horizontal_annihilation: ann,
            horizontal_metric_kernel: kernel,
            horizontal_metric_definition: def,
            pi_contraction: pi_c,
            orthogonality: ortho,
            curvature_antisymmetry: anti,
            christoffel_symmetry: chr,
            cov_d_symmetry: covs,
            inverse_derivative: inv,
            horizontal_metric_min_eigenvalue: eig,
        }
    }
}
