//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass a criterion number to run only that one.

// Tensor contractions read best with explicit indices.
#![allow(clippy::needless_range_loop)]

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use common::frames::{Frame, Structure};
use common::{adapted_samples, config, d_along, max_abs, Worst};
use lp_reduce::connection::{potentials, GeometryCache};
use lp_reduce::dual;
use lp_reduce::dynamics::{integrate, rhs, IntegrateOptions, ReducedState};
use lp_reduce::equilibria::{self, EquilibriumOptions};
use lp_reduce::fd;
use lp_reduce::gauge::{decompose, GaugeOptions, ProjectorSet};
use lp_reduce::linalg::max_abs_diff;
use lp_reduce::oracle::{self, Comparison, CompareTolerances, FullState};
use lp_reduce::sampling::Sampler;
use lp_reduce::system::{killing_ext, metric_ext, rep_bar};
use lp_reduce::{Dual64, Mat, Mat64, MechanicalSystem};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn summary(w: &Worst, tol: f64) -> Verdict {
    let (name, v) = w.max();
    let over = w.over(tol);
    if over.is_empty() {
        verdict(true, format!("worst {name} = {v:.2e} (tol {tol:.0e})"))
    } else {
        let list: Vec<String> = over.iter().map(|(n, v)| format!("{n} = {v:.2e}")).collect();
        verdict(false, format!("over tol {tol:.0e}: {}", list.join("; ")))
    }
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

// ---------------------------------------------------------------- 1

fn projector_suite() -> Verdict {
    let t0 = Instant::now();
    let sys = common::so3();
    let ng = sys.group().dim();
    let mut w = Worst::default();
    for p in adapted_samples(&sys, 200, 101) {
        let ps = ProjectorSet::new(&sys, &p.q, &p.f).unwrap();
        let (n, pp, pi, ne) = (&ps.n_pp, &ps.p_perp, &ps.pi, &ps.n_ext);
        w.add("N·N − N", n.matmul(n).max_abs_diff(n));
        w.add("N_ext·N_ext − N_ext", ne.matmul(ne).max_abs_diff(ne));
        w.add("P⊥·P⊥ − P⊥", pp.matmul(pp).max_abs_diff(pp));
        w.add("P⊥·N − N", pp.matmul(n).max_abs_diff(n));
        w.add("N·P⊥ − P⊥", n.matmul(pp).max_abs_diff(pp));
        w.add("N·K", n.matmul(&ps.k_p).max_abs());
        w.add("N_ext·K_ext", ne.matmul(&ps.k_ext).max_abs());
        w.add("χ·N", ps.chi.matmul(n).max_abs());
        w.add("χ·P⊥", ps.chi.matmul(pp).max_abs());
        w.add("Π·K", pi.matmul(&ps.k_ext).max_abs());
        w.add("Π·Π − Π", pi.matmul(pi).max_abs_diff(pi));
        w.add("N_ext·Π − N_ext", ne.matmul(pi).max_abs_diff(ne));
        w.add("Π·N_ext − Π", pi.matmul(ne).max_abs_diff(pi));
        let rank = n.to_nalgebra().singular_values().iter().filter(|&&s| s > 1e-8).count();
        w.add("rank N − (dim P − dim G)", (rank as f64 - (ps.dim_p() - ng) as f64).abs());
    }
    let secs = t0.elapsed().as_secs_f64();
    let v = summary(&w, 1e-10);
    verdict(v.passed && secs < 5.0, format!("200 points, {}; {secs:.2}s (limit 5s)", v.detail))
}

// ---------------------------------------------------------------- 2

/// Tangent of `(Q*, f̃, a) ↦ (F(Q*, a), D̄(a) f̃)` along `x`.
fn push_forward<S: MechanicalSystem>(sys: &S, z: &[f64], x: &[f64]) -> Vec<f64> {
    let (np, n) = (sys.dim_p(), sys.dim_ext());
    let zd = dual::seed_direction(z, x);
    let q = sys.action(&zd[..np], &zd[n..]).unwrap();
    let f = rep_bar(sys, &zd[n..]).matvec(&zd[np..n]);
    dual::tangents(&q).into_iter().chain(dual::tangents(&f)).collect()
}

fn connection_residuals<S: MechanicalSystem>(sys: &S, label: &str, seed: u64, w_form: &mut Worst, w_alg: &mut Worst) {
    let g = sys.group();
    let (np, n, ng) = (sys.dim_p(), sys.dim_ext(), g.dim());
    let fr = Frame::new(sys);
    let id = Mat64::identity(ng);
    for p in adapted_samples(sys, 50, seed) {
        let z = p.z();
        let qa = sys.action(&p.q, &p.a).unwrap();
        let fa = rep_bar(sys, &p.a).matvec(&p.f);
        let k = killing_ext(sys, &qa, &fa).unwrap();
        let gm = metric_ext(sys, &qa);
        let d = k.transpose().matmul(&gm).matmul(&k);
        let conn = d.try_inverse().unwrap().matmul(&k.transpose()).matmul(&gm);
        let pi = &Mat64::identity(n) - &k.matmul(&conn);
        w_form.add(&format!("{label} ambient ω̂(Π)"), conn.matmul(&pi).max_abs());
        w_form.add(&format!("{label} ambient ω̂(K) − δ"), conn.matmul(&k).max_abs_diff(&id));

        let ps = ProjectorSet::new(sys, &p.q, &p.f).unwrap();
        let pot = g.rho_bar(&p.a).matmul(&potentials(&ps));
        let u = g.u(&p.a);
        let form = |x: &[f64]| -> Vec<f64> {
            let a = pot.matvec(&x[..n]);
            let b = u.matvec(&x[n..]);
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        };
        for m in 0..n {
            let h = fr.h(&z, m);
            w_form.add(&format!("{label} adapted ω̂(H)"), max_abs(&form(&h)));
            w_form.add(&format!("{label} pushed ω̂(H)"), max_abs(&conn.matvec(&push_forward(sys, &z, &h))));
        }
        for al in 0..ng {
            let l = fr.l(&z, al);
            let mut e = form(&l);
            e[al] -= 1.0;
            w_form.add(&format!("{label} adapted ω̂(L) − δ"), max_abs(&e));
            let pushed = push_forward(sys, &z, &l);
            w_form.add(&format!("{label} pushed L − K"), max_abs_diff(&pushed, &k.col(al)));
            let mut e = conn.matvec(&pushed);
            e[al] -= 1.0;
            w_form.add(&format!("{label} pushed ω̂(L) − δ"), max_abs(&e));
        }

        let gc = GeometryCache::new(sys, &p.q, &p.f).unwrap();
        for f in &gc.curvature {
            w_alg.add(&format!("{label} ℱ + ℱᵀ"), (f + &f.transpose()).max_abs());
        }
        let rho = g.rho(&p.a);
        let lowered = gc.frame_metric(&rho);
        let raised = gc.frame_pseudo_inverse(&rho).unwrap();
        let target = Mat::block_diag(&ps.n_ext, &id);
        w_alg.add(&format!("{label} Ǧ·G_frame − diag(N, δ)"), raised.matmul(&lowered).max_abs_diff(&target));
        let _ = np;
    }
}

fn connection_suite() -> Verdict {
    let mut w_form = Worst::default();
    let mut w_alg = Worst::default();
    connection_residuals(&common::so3(), "so3-warped", 202, &mut w_form, &mut w_alg);
    connection_residuals(&common::two_vectors(), "two-vectors", 203, &mut w_form, &mut w_alg);
    let a = summary(&w_form, 1e-9);
    let b = summary(&w_alg, 1e-10);
    verdict(a.passed && b.passed, format!("connection form: {}; algebra: {}", a.detail, b.detail))
}

// ---------------------------------------------------------------- 3

type Field = Box<dyn Fn(&[f64]) -> f64>;

fn test_fields(dim: usize, seed: u64) -> Vec<Field> {
    let mut rng = Sampler::new(seed);
    let mut w = || rng.vector(dim, 1.0);
    let (w1, w2, w3, w4, w5) = (w(), w(), w(), w(), w());
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    vec![
        Box::new(move |z| dot(&w1, z).sin()),
        Box::new(move |z| (0.5 * dot(&w2, z)).exp()),
        Box::new(move |z| dot(&w3, z).powi(2) * dot(&w4, z)),
        Box::new(move |z| (z[0] * z[z.len() - 1]).cos() + dot(&w5, z).powi(3) / 3.0),
        Box::new(move |z| (2.0 + z.iter().enumerate().map(|(i, x)| (i as f64 + 1.0) * x * x).sum::<f64>()).ln()),
    ]
}

const H_IN: f64 = 1e-5;
const H_OUT: f64 = 1e-3;

fn along(z: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    z.iter().zip(dir).map(|(x, d)| x + t * d).collect()
}

fn derivative(phi: &dyn Fn(&[f64]) -> f64, z: &[f64], dir: &[f64], h: f64) -> f64 {
    (phi(&along(z, dir, h)) - phi(&along(z, dir, -h))) / (2.0 * h)
}

/// `X(Yφ) − Y(Xφ)` by nested central differences.
fn fd_bracket(phi: &Field, x: &dyn Fn(&[f64]) -> Vec<f64>, y: &dyn Fn(&[f64]) -> Vec<f64>, z: &[f64]) -> f64 {
    let y_phi = |p: &[f64]| derivative(phi.as_ref(), p, &y(p), H_IN);
    let x_phi = |p: &[f64]| derivative(phi.as_ref(), p, &x(p), H_IN);
    derivative(&y_phi, z, &x(z), H_OUT) - derivative(&x_phi, z, &y(z), H_OUT)
}

fn commutator_residuals<S: MechanicalSystem>(sys: &S, label: &str, seed: u64, w: &mut Worst) -> usize {
    let fr = Frame::new(sys);
    let (np, n, ng) = (fr.np, fr.n(), fr.ng);
    let fields = test_fields(n + ng, seed + 1);
    let mut count = 0;
    for p in adapted_samples(sys, 50, seed) {
        let z = p.z();
        let st = Structure::new(sys, &z);
        let hs: Vec<Vec<f64>> = (0..n).map(|m| fr.h(&z, m)).collect();
        let ls: Vec<Vec<f64>> = (0..ng).map(|a| fr.l(&z, a)).collect();
        for i in 0..n {
            for j in i + 1..n {
                let (ch, cl) = st.bracket(i, j);
                let mut closed = vec![0.0; n + ng];
                for (c, v) in ch.iter().zip(&hs).chain(cl.iter().zip(&ls)) {
                    for (o, x) in closed.iter_mut().zip(v) {
                        *o += c * x;
                    }
                }
                let kind = match (i < np, j < np) {
                    (true, true) => "[H_A,H_B]",
                    (true, false) => "[H_A,H_p]",
                    _ => "[H_p,H_q]",
                };
                for phi in &fields {
                    let lhs = fd_bracket(phi, &|y| fr.h(y, i), &|y| fr.h(y, j), &z);
                    let rhs = derivative(phi.as_ref(), &z, &closed, H_IN);
                    w.add(&format!("{label} {kind}"), (lhs - rhs).abs());
                    count += 1;
                }
            }
            for al in 0..ng {
                let phi = &fields[al % fields.len()];
                let lhs = fd_bracket(phi, &|y| fr.h(y, i), &|y| fr.l(y, al), &z);
                w.add(&format!("{label} [H,L]"), lhs.abs());
            }
        }
        let g = sys.group();
        for al in 0..ng {
            for be in al + 1..ng {
                let mut closed = vec![0.0; n + ng];
                for (ga, l) in ls.iter().enumerate() {
                    for (o, x) in closed.iter_mut().zip(l) {
                        *o += g.c(ga, al, be) * x;
                    }
                }
                for phi in &fields {
                    let lhs = fd_bracket(phi, &|y| fr.l(y, al), &|y| fr.l(y, be), &z);
                    w.add(&format!("{label} [L,L]"), (lhs - derivative(phi.as_ref(), &z, &closed, H_IN)).abs());
                }
            }
        }
    }
    count
}

fn commutator_suite() -> Verdict {
    let mut w = Worst::default();
    let a = commutator_residuals(&common::so3(), "so3-warped", 303, &mut w);
    let b = commutator_residuals(&common::two_vectors(), "two-vectors", 304, &mut w);
    let v = summary(&w, 1e-4);
    verdict(v.passed, format!("{} bracket evaluations, 5 fields, 50 points per system; {}", a + b, v.detail))
}

// ---------------------------------------------------------------- 4

fn reduction_residuals<S: MechanicalSystem>(sys: &S, label: &str, seed: u64, w: &mut Worst) {
    let g = sys.group();
    let (np, nv, n, ng) = (sys.dim_p(), sys.dim_v(), sys.dim_ext(), g.dim());
    let mut rng = Sampler::new(seed + 7);
    let c = |s: usize, a: usize, b: usize| g.c(s, a, b);
    for pt in adapted_samples(sys, 100, seed) {
        let z = pt.z();
        let st = Structure::new(sys, &z);
        let (ps, gc) = (&st.ps, &st.gc);
        let (nn, nvp, ne) = (&ps.n_pp, &ps.n_vp, &ps.n_ext);
        let omega_p = nn.matvec(&rng.vector(np, 0.6));
        let omega_v = rng.vector(nv, 0.6);
        let omega: Vec<f64> = omega_p.iter().chain(&omega_v).copied().collect();
        let om = rng.vector(ng, 0.6);
        let rho = g.rho(&pt.a);
        let rb = g.rho_bar(&pt.a);
        let p = ps.d.matvec(&rho.matvec(&om));

        // Λω = 0 and N^T_F Λ_T = 0
        w.add(&format!("{label} Λω"), max_abs(&ps.lambda.matvec(&omega_p)));
        w.add(&format!("{label} Λ·N"), ps.lambda.matmul(nn).max_abs());

        // structure functions entering the horizontal equations
        let ct: Vec<Vec<Vec<f64>>> = (0..np).map(|a| (0..np).map(|b| st.c_t(a, b)).collect()).collect();
        let cp: Vec<Vec<Vec<f64>>> = (0..np).map(|a| (0..np).map(|b| st.c_p(a, b)).collect()).collect();
        // ℂ^p_{nT} = −ℂ^p_{Tn}
        let cpn: Vec<Vec<Vec<f64>>> =
            (0..nv).map(|k| (0..np).map(|t| st.c_m(t, k).iter().map(|x| -x).collect()).collect()).collect();
        for f in 0..np {
            for m in 0..np {
                let v: f64 = (0..np).map(|t| (0..np).map(|cc| nn[(t, f)] * ct[cc][t][m] * omega[cc]).sum::<f64>()).sum();
                w.add(&format!("{label} N^T_F ℂ^M_CT ω^C"), v.abs());
            }
            for k in 0..nv {
                for q in 0..nv {
                    let v: f64 = (0..np).map(|t| nn[(t, f)] * cpn[k][t][q]).sum();
                    w.add(&format!("{label} N^T_F ℂ^p_nT"), v.abs());
                }
            }
            for m in 0..np {
                for q in 0..nv {
                    let v: f64 = (0..np).map(|t| nn[(t, f)] * cp[m][t][q]).sum();
                    w.add(&format!("{label} N^T_F ℂ^p_MT"), v.abs());
                }
            }
        }

        // symmetric-χ cancellation with comma derivatives of Λ
        let fc = dual::constants(&pt.f);
        let raw: Vec<Mat64> = (0..np)
            .map(|e| {
                let mut dir = vec![0.0; np];
                dir[e] = 1.0;
                d_along(&pt.q, &dir, |x| ProjectorSet::new(sys, x, &fc).unwrap().lambda)
            })
            .collect();
        let comma: Vec<Mat64> = (0..np)
            .map(|dd| {
                let mut acc = Mat64::zeros(ng, np);
                for (e, r) in raw.iter().enumerate() {
                    acc = &acc + &r.scale(ps.p_perp[(e, dd)]);
                }
                acc
            })
            .collect();
        for f in 0..np {
            for m in 0..np {
                for al in 0..ng {
                    let mut curl = 0.0;
                    let mut lam_rd = 0.0;
                    let mut hess = 0.0;
                    for r in 0..np {
                        for dd in 0..np {
                            let wgt = nn[(r, f)] * nn[(dd, m)];
                            curl += wgt * (comma[dd][(al, r)] - comma[r][(al, dd)]);
                            lam_rd += wgt * comma[dd][(al, r)];
                            for be in 0..ng {
                                hess += wgt * ps.phi_inv[(al, be)] * gc.chi_hessian[be][(r, dd)];
                            }
                        }
                    }
                    w.add(&format!("{label} N N (Λ_RD − Λ_DR)"), curl.abs());
                    w.add(&format!("{label} N N Λ_RD − N N Φ⁻¹χ_RD"), (lam_rd - hess).abs());
                }
            }
        }

        // vertical equation: L_α(d̃) and its cancellation
        let dl = Mat::<Dual64>::lift(&ps.d);
        let d_tilde = rho.transpose().matmul(&ps.d).matmul(&rho);
        let v = g.v(&pt.a).unwrap();
        let ld: Vec<Mat64> = (0..ng)
            .map(|al| {
                d_along(&pt.a, &v.col(al), |a| {
                    let r = g.rho(a);
                    r.transpose().matmul(&dl).matmul(&r)
                })
            })
            .collect();
        for al in 0..ng {
            let closed = Mat64::from_fn(ng, ng, |mu, nu| {
                (0..ng).map(|ga| c(ga, al, mu) * d_tilde[(ga, nu)] + c(ga, al, nu) * d_tilde[(ga, mu)]).sum()
            });
            w.add(&format!("{label} L_α d̃ − (c d̃ + c d̃)"), ld[al].max_abs_diff(&closed));
            let dw = d_tilde.matvec(&om);
            let mut s = 0.5 * ld[al].bilinear(&om, &om);
            for e in 0..ng {
                for nu in 0..ng {
                    s += dw[e] * c(e, nu, al) * om[nu];
                }
            }
            w.add(&format!("{label} vertical cancellation"), s.abs());
        }
        let state = ReducedState {
            q_star: pt.q.clone(),
            f_tilde: pt.f.clone(),
            omega_p: omega_p.clone(),
            omega_v: omega_v.clone(),
            p: p.clone(),
            a: pt.a.clone(),
        };
        let ds = rhs(sys, &state).unwrap();
        let drho = d_along(&pt.a, &ds.a, |a| g.rho(a));
        let dj: Vec<f64> =
            rho.transpose().matvec(&ds.p).iter().zip(drho.transpose().matvec(&p)).map(|(x, y)| x + y).collect();
        w.add(&format!("{label} d/dt(ρᵀp)"), max_abs(&dj));

        // quadratic ω terms: raw list against the Christoffel form
        let (gh, dgh) = (&gc.g_h, &gc.d_g_h);
        let quad = |x: &Mat64| x.bilinear(&omega, &omega);
        let gw = gh.vecmat(&omega);
        let raw_a: Vec<f64> = (0..np)
            .map(|t| {
                let mut s = 0.0;
                for b in 0..n {
                    for m in 0..n {
                        s -= dgh[m][(b, t)] * omega[b] * omega[m];
                    }
                }
                for d in 0..n {
                    s += 0.5 * ne[(d, t)] * quad(&dgh[d]);
                }
                for m in 0..np {
                    s += gw[m] * (0..np).map(|cc| ct[cc][t][m] * omega[cc]).sum::<f64>();
                }
                for q in 0..nv {
                    let cq = (0..np).map(|m| cp[m][t][q] * omega[m]).sum::<f64>()
                        + (0..nv).map(|k| cpn[k][t][q] * omega[np + k]).sum::<f64>();
                    s += gw[np + q] * cq;
                }
                s
            })
            .collect();
        let raw_b: Vec<f64> = (0..nv)
            .map(|m| {
                let mut s = 0.0;
                for b in 0..n {
                    for r in 0..n {
                        s -= dgh[r][(b, np + m)] * omega[b] * omega[r];
                    }
                }
                for q in 0..nv {
                    s += gw[np + q] * (0..np).map(|e| st.c_m(e, m)[q] * omega[e]).sum::<f64>();
                }
                s + 0.5 * quad(&dgh[np + m])
            })
            .collect();
        let gam = gc.christoffel_contract(&omega);
        for f in 0..np {
            let lhs: f64 = (0..np).map(|t| nn[(t, f)] * raw_a[t]).sum::<f64>()
                + (0..nv).map(|m| nvp[(m, f)] * raw_b[m]).sum::<f64>();
            let rhs: f64 = -(0..n).map(|t| ne[(t, f)] * gam[t]).sum::<f64>();
            w.add(&format!("{label} quadratic terms: raw − Christoffel"), (lhs - rhs).abs());
        }
        for m in 0..nv {
            w.add(&format!("{label} quadratic B_m: raw − Christoffel"), (raw_b[m] + gam[np + m]).abs());
        }

        // ω^μ terms: raw list against the covariant form and the p form
        let atil = rb.matmul(&gc.potentials);
        let dw = d_tilde.matvec(&om);
        let dd_tilde: Vec<Mat64> = (0..n).map(|k| rho.transpose().matmul(&gc.d_orbit[k]).matmul(&rho)).collect();
        let lie_part = |k: usize| -> f64 {
            let mut s = dd_tilde[k].bilinear(&om, &om);
            for al in 0..ng {
                s -= atil[(al, k)] * ld[al].bilinear(&om, &om);
            }
            0.5 * s
        };
        let contract = |coef: &[f64]| -> f64 { dw.iter().zip(coef).map(|(x, y)| x * y).sum() };
        let raw_mu_a: Vec<f64> = (0..np)
            .map(|t| {
                let mut s: f64 = (0..n).map(|d| ne[(d, t)] * lie_part(d)).sum();
                for cc in 0..np {
                    s += contract(&st.c_alpha_pp(cc, t)) * omega[cc];
                }
                for q in 0..nv {
                    s -= contract(&st.c_alpha_pv(t, q)) * omega[np + q];
                }
                s
            })
            .collect();
        let raw_mu_b: Vec<f64> = (0..nv)
            .map(|m| {
                let mut s = lie_part(np + m);
                for e in 0..np {
                    s += contract(&st.c_alpha_pv(e, m)) * omega[e];
                }
                for q in 0..nv {
                    s += contract(&st.c_alpha_vv(q, m)) * omega[np + q];
                }
                s
            })
            .collect();
        let closed_mu: Vec<f64> = (0..n)
            .map(|r| {
                let mut s = 0.0;
                for e in 0..ng {
                    for q in 0..n {
                        s -= dw[e] * st.f_tilde[e][(q, r)] * omega[q];
                    }
                }
                let cov = Mat64::from_fn(ng, ng, |mu, nu| {
                    let mut v = dd_tilde[r][(mu, nu)];
                    for si in 0..ng {
                        for al in 0..ng {
                            v -= c(si, al, mu) * atil[(al, r)] * d_tilde[(si, nu)];
                            v -= c(si, al, nu) * atil[(al, r)] * d_tilde[(si, mu)];
                        }
                    }
                    v
                });
                s + 0.5 * cov.bilinear(&om, &om)
            })
            .collect();
        for f in 0..np {
            let lhs: f64 = (0..np).map(|t| nn[(t, f)] * raw_mu_a[t]).sum::<f64>()
                + (0..nv).map(|m| nvp[(m, f)] * raw_mu_b[m]).sum::<f64>();
            let rhs: f64 = (0..n).map(|r| ne[(r, f)] * closed_mu[r]).sum();
            w.add(&format!("{label} ω^μ terms: raw − covariant"), (lhs - rhs).abs());
        }
        for m in 0..nv {
            w.add(&format!("{label} ω^μ B_m: raw − covariant"), (raw_mu_b[m] - closed_mu[np + m]).abs());
        }
        let mag = gc.magnetic(&omega, &p);
        for r in 0..n {
            let pform = mag[r] + 0.5 * gc.cov_d_inv[r].bilinear(&p, &p);
            w.add(&format!("{label} ω^μ form + p form"), (closed_mu[r] + pform).abs());
        }
    }
}

fn reduction_identities() -> Verdict {
    let mut w = Worst::default();
    reduction_residuals(&common::so3(), "so3-warped", 404, &mut w);
    reduction_residuals(&common::two_vectors(), "two-vectors", 405, &mut w);
    let v = summary(&w, 1e-8);
    verdict(v.passed, format!("100 states per system; {}", v.detail))
}

// ---------------------------------------------------------------- 5, 6

fn so3_initial() -> FullState {
    config(common::SO3_CONFIG).initial.unwrap()
}

fn comparison() -> &'static (Comparison, f64) {
    static CELL: OnceLock<(Comparison, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t0 = Instant::now();
        let c = oracle::compare(
            &common::so3(),
            &so3_initial(),
            &IntegrateOptions::new(1e-3, 2.0),
            &CompareTolerances::default(),
        )
        .unwrap();
        (c, t0.elapsed().as_secs_f64())
    })
}

fn oracle_equivalence() -> Verdict {
    let (c, secs) = comparison();
    let r = &c.report;
    let passed = r.failure.is_none() && r.shape.max < 1e-5 && r.reconstruction.max < 1e-4 && *secs < 30.0;
    verdict(
        passed,
        format!(
            "t = 2, dt = 1e-3: shape {:.2e} (tol 1e-5), a-error {:.2e} (tol 1e-4), {} steps, {secs:.2}s (limit 30s){}",
            r.shape.max,
            r.reconstruction.max,
            r.steps_compared,
            r.failure.as_ref().map(|f| format!(", failure: {f}")).unwrap_or_default()
        ),
    )
}

fn endpoint_error(dt: f64, reference: &ReducedState, r0: &ReducedState) -> f64 {
    let t = integrate(&common::so3(), r0, &IntegrateOptions::new(dt, 2.0)).unwrap();
    assert!(t.completed(), "{:?}", t.failure);
    max_abs_diff(&t.last().to_flat(), &reference.to_flat())
}

fn conservation() -> Verdict {
    let (c, _) = comparison();
    let e = c.reduced.energy_drift();
    let j = c.reduced.invariant_drift();
    let sys = common::so3();
    let r0 = oracle::reduce_initial(&sys, &so3_initial(), &GaugeOptions::default()).unwrap();
    let reference = integrate(&sys, &r0, &IntegrateOptions::new(0.05 / 64.0, 2.0)).unwrap();
    let errs: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&dt| endpoint_error(dt, reference.last(), &r0)).collect();
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let order_ok = ratios.iter().all(|r| (12.0..=20.0).contains(r));
    verdict(
        e < 1e-7 && j < 1e-7 && order_ok,
        format!(
            "energy drift {e:.2e} (tol 1e-7 rel), ρᵀp drift {j:.2e} (tol 1e-7 abs); endpoint errors {:.2e}/{:.2e}/{:.2e} at dt 0.1/0.05/0.025, ratios {:.2}, {:.2} (want [12, 20])",
            errs[0], errs[1], errs[2], ratios[0], ratios[1]
        ),
    )
}

// ---------------------------------------------------------------- 7

fn gauge_independence() -> Verdict {
    let sys = common::so3();
    let base = so3_initial();
    let mut rng = Sampler::new(707);
    let opts = IntegrateOptions::new(1e-3, 2.0);
    let mut runs = Vec::new();
    let mut spread_a: f64 = 0.0;
    let mut a0 = None;
    for k in 0..6 {
        let s = if k == 0 { base.clone() } else { common::translate(&sys, &base, &rng.in_ball(3, 0.5)) };
        let r0 = oracle::reduce_initial(&sys, &s, &opts.gauge).unwrap();
        let a_ref: &Vec<f64> = a0.get_or_insert(r0.a.clone());
        spread_a = spread_a.max(max_abs_diff(a_ref, &r0.a));
        let t = integrate(&sys, &r0, &opts).unwrap();
        assert!(t.completed(), "{:?}", t.failure);
        runs.push(t);
    }
    let mut worst: f64 = 0.0;
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            for (x, y) in runs[i].states.iter().zip(&runs[j].states) {
                worst = worst.max(max_abs_diff(&x.q_star, &y.q_star)).max(max_abs_diff(&x.f_tilde, &y.f_tilde));
            }
        }
    }
    verdict(
        worst < 1e-6 && spread_a > 0.1,
        format!("5 translations (group offsets up to {spread_a:.2}): pairwise (Q*, f̃) deviation {worst:.2e} over t = 2 (tol 1e-6)"),
    )
}

// ---------------------------------------------------------------- 8

/// Gradient descent on `V` over the ambient coordinates: finite-difference
/// gradient, Barzilai-Borwein step with a descent safeguard.
fn descend<S: MechanicalSystem>(sys: &S, q: &[f64], f: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let np = sys.dim_p();
    let v = |x: &[f64]| sys.potential(&x[..np], &x[np..]);
    let grad = |x: &[f64]| fd::gradient(x, 1e-5, v);
    let mut z: Vec<f64> = q.iter().chain(f).copied().collect();
    let mut gr = grad(&z);
    let mut step = 0.05;
    for _ in 0..100_000 {
        if max_abs(&gr) < 1e-11 {
            break;
        }
        let mut trial: Vec<f64>;
        loop {
            trial = z.iter().zip(&gr).map(|(x, g)| x - step * g).collect();
            if v(&trial) <= v(&z) + 1e-14 || step < 1e-10 {
                break;
            }
            step *= 0.5;
        }
        let g_new = grad(&trial);
        let s: Vec<f64> = trial.iter().zip(&z).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&gr).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        step = if sy > 0.0 { (ss / sy).clamp(1e-4, 10.0) } else { 0.05 };
        z = trial;
        gr = g_new;
    }
    (z[..np].to_vec(), z[np..].to_vec(), max_abs(&gr))
}

fn potential_minimum_check<S: MechanicalSystem>(sys: &S, q: &[f64], f: &[f64]) -> (f64, f64) {
    let opts = EquilibriumOptions::default();
    let eq = equilibria::solve_equilibrium(sys, q, f, 0.0, 0, &opts).unwrap();
    let (qm, fm, gnorm) = descend(sys, q, f);
    let pt = decompose(sys, &qm, &fm, None, &GaugeOptions::default()).unwrap();
    let err = max_abs_diff(&pt.q_star, &eq.q_star).max(max_abs_diff(&pt.f_tilde, &eq.f_tilde));
    (err, gnorm)
}

fn relative_equilibria() -> Verdict {
    let sys = common::so3();
    let cfg = config(common::SO3_CONFIG);
    let eqc = cfg.equilibria.unwrap();
    let opts = EquilibriumOptions::default();
    let mut res: f64 = 0.0;
    let mut accel: f64 = 0.0;
    let mut drift: f64 = 0.0;
    for seed in &eqc.seeds {
        let e = equilibria::solve_equilibrium(&sys, &seed.q, &seed.f, eqc.p_magnitude, eqc.eigen_index, &opts).unwrap();
        let r = &e.residuals;
        res = res.max(r.horizontal_p).max(r.horizontal_v).max(r.vertical);
        // same point through the dynamics: ω = 0 must stay at rest
        let s = ReducedState {
            q_star: e.q_star.clone(),
            f_tilde: e.f_tilde.clone(),
            omega_p: vec![0.0; sys.dim_p()],
            omega_v: vec![0.0; sys.dim_v()],
            p: e.p.clone(),
            a: vec![0.0; 3],
        };
        let ds = rhs(&sys, &s).unwrap();
        accel = accel.max(max_abs(&ds.omega_p)).max(max_abs(&ds.omega_v)).max(max_abs(&ds.p));
        drift = drift.max(equilibria::verify(&sys, &e, 1.0, 1e-2).unwrap().shape_drift);
    }
    let (err_so3, g1) = potential_minimum_check(&sys, &eqc.seeds[0].q, &eqc.seeds[0].f);
    let tv = common::two_vectors();
    let pt = config(common::TWO_VECTORS_CONFIG).point.unwrap();
    let (err_tv, g2) = potential_minimum_check(&tv, &pt.q, &pt.f);
    let passed = res < 1e-8 && accel < 1e-8 && drift < 1e-6 && err_so3 < 1e-8 && err_tv < 1e-8;
    verdict(
        passed,
        format!(
            "|p| = {}: residual {res:.2e}, rest acceleration {accel:.2e} (tol 1e-8), shape drift over t = 1 {drift:.2e} (tol 1e-6); p = 0 vs gradient descent: so3-warped {err_so3:.2e}, two-vectors {err_tv:.2e} (tol 1e-8; descent gradients {g1:.0e}, {g2:.0e})",
            eqc.p_magnitude
        ),
    )
}

// ---------------------------------------------------------------- 9

fn run_cli(cmd: &str, out: &std::path::Path) -> i32 {
    let config = repo_root().join("configs/so3-warped.json");
    Command::new(env!("CARGO_BIN_EXE_lp-reduce"))
        .args([cmd, "--config"])
        .arg(&config)
        .arg("--out")
        .arg(out)
        .args(["--t-end", "0.5"])
        .env("LP_REDUCE_THREADS", "2")
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn cli_determinism() -> Verdict {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for cmd in ["check", "simulate", "compare"] {
        let (c1, c2) = (run_cli(cmd, d1.path()), run_cli(cmd, d2.path()));
        if c1 != 0 || c2 != 0 {
            ok = false;
            notes.push(format!("{cmd} exit {c1}/{c2}"));
        }
    }
    let mut names: Vec<String> =
        std::fs::read_dir(d1.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    for name in &names {
        let a = std::fs::read(d1.path().join(name)).unwrap();
        let b = std::fs::read(d2.path().join(name)).unwrap_or_default();
        if a != b {
            ok = false;
            notes.push(format!("{name} differs"));
        }
    }

    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(repo_root().join("schema/config.schema.json")).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut configs = 0;
    for entry in std::fs::read_dir(repo_root().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let raw: serde_json::Value = serde_json::from_str(&text).unwrap();
        let cfg = lp_reduce::cli::RunConfig::from_json(&text, &path).unwrap();
        let back = serde_json::to_value(&cfg).unwrap();
        let again: lp_reduce::cli::RunConfig = serde_json::from_value(back.clone()).unwrap();
        if !validator.is_valid(&raw) || !validator.is_valid(&back) || again != cfg {
            ok = false;
            notes.push(format!("{} does not round-trip", path.display()));
        }
        let mut bad = raw.clone();
        bad["dtt"] = serde_json::json!(1.0);
        if validator.is_valid(&bad) || lp_reduce::cli::RunConfig::from_json(&bad.to_string(), &path).is_ok() {
            ok = false;
            notes.push(format!("{}: unknown field accepted", path.display()));
        }
        configs += 1;
    }
    let detail = format!(
        "{} output files byte-identical across two runs; {configs} configs validate and round-trip through the schema{}",
        names.len(),
        if notes.is_empty() { String::new() } else { format!("; {}", notes.join(", ")) }
    );
    verdict(ok && !names.is_empty(), detail)
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("projector algebra", projector_suite),
        ("connection", connection_suite),
        ("commutators", commutator_suite),
        ("reduction identities", reduction_identities),
        ("oracle equivalence", oracle_equivalence),
        ("conservation and RK4 order", conservation),
        ("gauge independence", gauge_independence),
        ("relative equilibria", relative_equilibria),
        ("CLI determinism and schema", cli_determinism),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let t0 = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.passed {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name} | {} [{:.2}s]",
            if v.passed { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
