//! The horizontal/left-invariant frame on `(Q*, f̃, a)` and the closed-form
//! structure functions of its brackets, assembled term by term.

use lp_reduce::connection::{potentials, GeometryCache};
use lp_reduce::dual;
use lp_reduce::gauge::ProjectorSet;
use lp_reduce::{Mat64, MechanicalSystem};

use super::d_along;

pub struct Frame<'a, S: MechanicalSystem> {
    pub sys: &'a S,
    pub np: usize,
    pub nv: usize,
    pub ng: usize,
}

impl<'a, S: MechanicalSystem> Frame<'a, S> {
    pub fn new(sys: &'a S) -> Self {
        Frame { sys, np: sys.dim_p(), nv: sys.dim_v(), ng: sys.group().dim() }
    }

    pub fn n(&self) -> usize {
        self.np + self.nv
    }

    pub fn split<'z>(&self, z: &'z [f64]) -> (&'z [f64], &'z [f64], &'z [f64]) {
        (&z[..self.np], &z[self.np..self.n()], &z[self.n()..])
    }

    /// `H_M = N^Ñ_M (∂_Ñ − 𝒜̃^α_Ñ L_α)` for extended index `m`.
    pub fn h(&self, z: &[f64], m: usize) -> Vec<f64> {
        let (q, f, a) = self.split(z);
        let g = self.sys.group();
        let ps = ProjectorSet::new(self.sys, q, f).unwrap();
        let col = ps.n_ext.col(m);
        let w = potentials(&ps).matvec(&col);
        let w = g.v(a).unwrap().matvec(&g.rho_bar(a).matvec(&w));
        col.into_iter().chain(w.into_iter().map(|x| -x)).collect()
    }

    /// `L_α = v^ν_α ∂_{a^ν}`.
    pub fn l(&self, z: &[f64], alpha: usize) -> Vec<f64> {
        let (_, _, a) = self.split(z);
        let mut out = vec![0.0; self.n()];
        out.extend(self.sys.group().v(a).unwrap().col(alpha));
        out
    }
}

/// Closed-form structure functions at one point of `Σ × V × 𝒢`.
pub struct Structure {
    pub np: usize,
    pub nv: usize,
    pub ng: usize,
    pub ps: ProjectorSet<f64>,
    pub gc: GeometryCache<f64>,
    /// `ℱ̃^α = ρ̄ℱ`.
    pub f_tilde: Vec<Mat64>,
    /// `K^T_{γ,R} N^R_B`, one matrix per `B`.
    pub dk: Vec<Mat64>,
    /// `Λ^α_{R,D} N^D_B`, one matrix per `B`.
    pub dl: Vec<Mat64>,
    pub generators: Vec<Mat64>,
    pub c: Vec<f64>,
}

impl Structure {
    pub fn new<S: MechanicalSystem>(sys: &S, z: &[f64]) -> Self {
        let (np, nv, ng) = (sys.dim_p(), sys.dim_v(), sys.group().dim());
        let (q, f, a) = (&z[..np], &z[np..np + nv], &z[np + nv..]);
        let g = sys.group();
        let ps = ProjectorSet::new(sys, q, f).unwrap();
        let gc = GeometryCache::new(sys, q, f).unwrap();
        let f_tilde = gc.curvature_tilde(&g.rho_bar(a));
        let fc = dual::constants(f);
        let mut dk = Vec::new();
        let mut dl = Vec::new();
        for b in 0..np {
            let dir = ps.n_pp.col(b);
            dk.push(d_along(q, &dir, |x| sys.killing_p(x).unwrap()));
            dl.push(d_along(q, &dir, |x| ProjectorSet::new(sys, x, &fc).unwrap().lambda));
        }
        let mut c = vec![0.0; ng * ng * ng];
        for s in 0..ng {
            for al in 0..ng {
                for be in 0..ng {
                    c[(s * ng + al) * ng + be] = g.c(s, al, be);
                }
            }
        }
        Structure { np, nv, ng, ps, gc, f_tilde, dk, dl, generators: sys.rep_generators().to_vec(), c }
    }

    fn cc(&self, s: usize, a: usize, b: usize) -> f64 {
        self.c[(s * self.ng + a) * self.ng + b]
    }

    fn big_f(&self, alpha: usize, i: usize, j: usize) -> f64 {
        self.f_tilde[alpha][(i, j)]
    }

    /// `ℂ^T_{AB} = (Λ^γ_A N^R_B − Λ^γ_B N^R_A) K^T_{γ,R}`.
    pub fn c_t(&self, a: usize, b: usize) -> Vec<f64> {
        let lam = &self.ps.lambda;
        (0..self.np)
            .map(|t| {
                (0..self.ng)
                    .map(|g| lam[(g, a)] * self.dk[b][(t, g)] - lam[(g, b)] * self.dk[a][(t, g)])
                    .sum()
            })
            .collect()
    }

    /// `ℂ^p_{AB} = −N^D_A N^R_B (Λ^α_{R,D} − Λ^α_{D,R}) K^p_α − c^σ_{αβ} Λ^β_A Λ^α_B K^p_σ`.
    pub fn c_p(&self, a: usize, b: usize) -> Vec<f64> {
        let (lam, n, kv) = (&self.ps.lambda, &self.ps.n_pp, &self.ps.k_v);
        let curl: Vec<f64> = (0..self.ng)
            .map(|al| {
                let mut v = 0.0;
                for r in 0..self.np {
                    v += self.dl[a][(al, r)] * n[(r, b)] - self.dl[b][(al, r)] * n[(r, a)];
                }
                v
            })
            .collect();
        (0..self.nv)
            .map(|p| {
                let mut v = 0.0;
                for al in 0..self.ng {
                    v -= curl[al] * kv[(p, al)];
                }
                for s in 0..self.ng {
                    for al in 0..self.ng {
                        for be in 0..self.ng {
                            v -= self.cc(s, al, be) * lam[(be, a)] * lam[(al, b)] * kv[(p, s)];
                        }
                    }
                }
                v
            })
            .collect()
    }

    /// `ℂ^α_{AB} = −N^S_A N^P_B ℱ̃_{SP} − (N^E_A N^p_B − N^E_B N^p_A) ℱ̃_{Ep} + N^m_A N^p_B ℱ̃_{pm}`.
    pub fn c_alpha_pp(&self, a: usize, b: usize) -> Vec<f64> {
        let (n, nv, np) = (&self.ps.n_pp, &self.ps.n_vp, self.np);
        (0..self.ng)
            .map(|al| {
                let mut v = 0.0;
                for s in 0..np {
                    for p in 0..np {
                        v -= n[(s, a)] * n[(p, b)] * self.big_f(al, s, p);
                    }
                }
                for e in 0..np {
                    for p in 0..self.nv {
                        v -= (n[(e, a)] * nv[(p, b)] - n[(e, b)] * nv[(p, a)]) * self.big_f(al, e, np + p);
                    }
                }
                for m in 0..self.nv {
                    for p in 0..self.nv {
                        v += nv[(m, a)] * nv[(p, b)] * self.big_f(al, np + p, np + m);
                    }
                }
                v
            })
            .collect()
    }

    /// `ℂ^m_{Ap} = (J̄_α)^m_p Λ^α_A`.
    pub fn c_m(&self, a: usize, p: usize) -> Vec<f64> {
        (0..self.nv)
            .map(|m| (0..self.ng).map(|al| self.generators[al][(m, p)] * self.ps.lambda[(al, a)]).sum())
            .collect()
    }

    /// `ℂ^α_{Ap} = −N^E_A ℱ̃_{Ep} − N^m_A ℱ̃_{mp}`.
    pub fn c_alpha_pv(&self, a: usize, p: usize) -> Vec<f64> {
        let np = self.np;
        (0..self.ng)
            .map(|al| {
                let mut v = 0.0;
                for e in 0..np {
                    v -= self.ps.n_pp[(e, a)] * self.big_f(al, e, np + p);
                }
                for m in 0..self.nv {
                    v -= self.ps.n_vp[(m, a)] * self.big_f(al, np + m, np + p);
                }
                v
            })
            .collect()
    }

    /// `ℂ^α_{pq} = −ℱ̃_{pq}`.
    pub fn c_alpha_vv(&self, p: usize, q: usize) -> Vec<f64> {
        (0..self.ng).map(|al| -self.big_f(al, self.np + p, self.np + q)).collect()
    }

    /// `[H_i, H_j]` expanded in the frame, as coefficient lists
    /// `(on H_T̃, on L_α)`.
    pub fn bracket(&self, i: usize, j: usize) -> (Vec<f64>, Vec<f64>) {
        let np = self.np;
        let n = np + self.nv;
        let mut h = vec![0.0; n];
        match (i < np, j < np) {
            (true, true) => {
                h[..np].copy_from_slice(&self.c_t(i, j));
                h[np..].copy_from_slice(&self.c_p(i, j));
                (h, self.c_alpha_pp(i, j))
            }
            (true, false) => {
                h[np..].copy_from_slice(&self.c_m(i, j - np));
                (h, self.c_alpha_pv(i, j - np))
            }
            (false, true) => {
                let (h, l) = self.bracket(j, i);
                (h.iter().map(|x| -x).collect(), l.iter().map(|x| -x).collect())
            }
            (false, false) => (h, self.c_alpha_vv(i - np, j - np)),
        }
    }
}
