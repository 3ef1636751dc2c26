//! Full-space Euler–Lagrange integrator in the original coordinates `(Q, f)`
//! and the comparison against the reduced equations.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::connection::potentials;
use crate::dual::{self, Dual};
use crate::dynamics::{integrate, IntegrateOptions, ReducedState, Trajectory};
use crate::error::{Error, Result};
use crate::gauge::{decompose, decompose_generic, GaugeOptions, ProjectorSet};
use crate::linalg::{max_abs_diff, Mat};
use crate::system::{action_jacobian, gauge_jacobian, killing_ext, killing_v, metric_ext, rep, MechanicalSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub q: Vec<f64>,
    pub f: Vec<f64>,
    pub q_dot: Vec<f64>,
    pub f_dot: Vec<f64>,
}

impl FullState {
    fn to_flat(&self) -> Vec<f64> {
        [&self.q, &self.f, &self.q_dot, &self.f_dot].into_iter().flat_map(|v| v.iter().copied()).collect()
    }

    fn from_flat(np: usize, nv: usize, x: &[f64]) -> Self {
        FullState {
            q: x[..np].to_vec(),
            f: x[np..np + nv].to_vec(),
            q_dot: x[np + nv..2 * np + nv].to_vec(),
            f_dot: x[2 * np + nv..].to_vec(),
        }
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.q_dot.iter().chain(&self.f_dot).copied().collect()
    }

    pub fn check_dims<S: MechanicalSystem>(&self, sys: &S) -> Result<()> {
        let (np, nv) = (sys.dim_p(), sys.dim_v());
        for (name, len, want) in [
            ("q", self.q.len(), np),
            ("f", self.f.len(), nv),
            ("q_dot", self.q_dot.len(), np),
            ("f_dot", self.f_dot.len(), nv),
        ] {
            if len != want {
                return Err(Error::config(
                    "initial",
                    format!("initial.{name}: expected {want} components, got {len}"),
                ));
            }
        }
        Ok(())
    }
}

/// Euler–Lagrange accelerations `G Q̈ = −(∂_C G Q̇^C) Q̇ + ½ ∂_Q(G Q̇ Q̇) − ∂_Q V`,
/// `G_V f̈ = −∂_f V`.
pub fn full_rhs<S: MechanicalSystem>(sys: &S, s: &FullState) -> Result<FullState> {
    let np = sys.dim_p();
    let g = sys.metric_p(&s.q);
    let dg_along = sys.metric_p(&dual::seed_direction(&s.q, &s.q_dot)).map_to(|x| x.eps);
    let grad_kin = dual::gradient(&s.q, |x| {
        let qd: Vec<Dual<f64>> = dual::constants(&s.q_dot);
        sys.metric_p(x).bilinear(&qd, &qd)
    });
    let z: Vec<f64> = s.q.iter().chain(&s.f).copied().collect();
    let grad_v = dual::gradient(&z, |x| sys.potential(&x[..np], &x[np..]));
    let first = dg_along.matvec(&s.q_dot);
    let rhs_p: Vec<f64> = (0..np).map(|a| -first[a] + 0.5 * grad_kin[a] - grad_v[a]).collect();
    let qdd = g
        .symmetrize()
        .solve(&rhs_p)
        .map_err(|_| Error::SingularMetric { context: "G_AB along the full trajectory".into() })?;
    let rhs_v: Vec<f64> = grad_v[np..].iter().map(|x| -x).collect();
    let fdd = sys
        .metric_v()
        .solve(&rhs_v)
        .map_err(|_| Error::SingularMetric { context: "G_mn".into() })?;
    Ok(FullState { q: s.q_dot.clone(), f: s.f_dot.clone(), q_dot: qdd, f_dot: fdd })
}

pub fn full_energy<S: MechanicalSystem>(sys: &S, s: &FullState) -> f64 {
    let w = s.velocity();
    0.5 * metric_ext(sys, &s.q).bilinear(&w, &w) + sys.potential(&s.q, &s.f)
}

/// Noether momentum `K^Ã_α G_ÃB̃ (velocity)^B̃`.
pub fn noether_momentum<S: MechanicalSystem>(sys: &S, s: &FullState) -> Result<Vec<f64>> {
    let k = killing_ext(sys, &s.q, &s.f)?;
    Ok(k.transpose().matmul(&metric_ext(sys, &s.q)).matvec(&s.velocity()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<FullState>,
    pub energy: Vec<f64>,
    pub momentum: Vec<Vec<f64>>,
    pub failure: Option<String>,
}

impl FullTrajectory {
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0).abs() / e0.abs().max(1e-300)).fold(0.0, f64::max)
    }

    pub fn momentum_drift(&self) -> f64 {
        let j0 = &self.momentum[0];
        self.momentum.iter().map(|j| max_abs_diff(j, j0)).fold(0.0, f64::max)
    }
}

pub fn integrate_full<S: MechanicalSystem>(sys: &S, initial: &FullState, dt: f64, t_end: f64) -> Result<FullTrajectory> {
    initial.check_dims(sys)?;
    IntegrateOptions::new(dt, t_end).validate()?;
    let (np, nv) = (sys.dim_p(), sys.dim_v());
    let mut traj = FullTrajectory {
        times: vec![0.0],
        states: vec![initial.clone()],
        energy: vec![full_energy(sys, initial)],
        momentum: vec![noether_momentum(sys, initial)?],
        failure: None,
    };
    let steps = (t_end / dt).round() as usize;
    let mut s = initial.clone();
    for i in 1..=steps {
        let t = i as f64 * dt;
        let step = (|| -> Result<FullState> {
            let x = s.to_flat();
            let at = |k: &[f64], h: f64| {
                FullState::from_flat(np, nv, &x.iter().zip(k).map(|(a, b)| a + h * b).collect::<Vec<_>>())
            };
            let k1 = full_rhs(sys, &s)?.to_flat();
            let k2 = full_rhs(sys, &at(&k1, 0.5 * dt))?.to_flat();
            let k3 = full_rhs(sys, &at(&k2, 0.5 * dt))?.to_flat();
            let k4 = full_rhs(sys, &at(&k3, dt))?.to_flat();
            let y: Vec<f64> =
                (0..x.len()).map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("full state after RK4 step".into()));
            }
            Ok(FullState::from_flat(np, nv, &y))
        })()
        .and_then(|next| Ok((noether_momentum(sys, &next)?, next)));
        match step {
            Ok((j, next)) => {
                traj.times.push(t);
                traj.energy.push(full_energy(sys, &next));
                traj.momentum.push(j);
                traj.states.push(next.clone());
                s = next;
            }
            Err(e) => {
                warn!("full integration stopped at t = {t}: {e}");
                traj.failure = Some(format!("t = {t}: {e}"));
                break;
            }
        }
    }
    Ok(traj)
}

/// Velocity split of a full state at its adapted point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocitySplit {
    pub q_star_dot: Vec<f64>,
    pub f_tilde_dot: Vec<f64>,
    /// Left-trivialized group velocity `ξ = u(a) ȧ`.
    pub xi: Vec<f64>,
}

/// Chain-rule pushforward: solve `F_Q(Q*, a) Q̇* + K(Q) ξ = Q̇`, `χ_A Q̇*^A = 0`,
/// then `df̃/dt = D(a)(ḟ − ξ^α J̄_α f)`.
pub fn split_velocity<S: MechanicalSystem>(sys: &S, s: &FullState, q_star: &[f64], a: &[f64]) -> Result<VelocitySplit> {
    let np = sys.dim_p();
    let ng = sys.group().dim();
    let fq = action_jacobian(sys, q_star, a)?;
    let k = sys.killing_p(&s.q)?;
    let chi = gauge_jacobian(sys, q_star);
    let mut m = Mat::zeros(np + ng, np + ng);
    m.set_block(0, 0, &fq);
    m.set_block(0, np, &k);
    m.set_block(np, 0, &chi);
    let mut rhs = s.q_dot.clone();
    rhs.extend(std::iter::repeat_n(0.0, ng));
    let x = m.solve(&rhs).map_err(|_| Error::SingularLinearSystem)?;
    let xi = x[np..].to_vec();
    let kv = killing_v(sys, &s.f).matvec(&xi);
    let moved: Vec<f64> = s.f_dot.iter().zip(&kv).map(|(a, b)| a - b).collect();
    Ok(VelocitySplit { q_star_dot: x[..np].to_vec(), f_tilde_dot: rep(sys, a).matvec(&moved), xi })
}

/// Same split, obtained by differentiating the decomposition along the
/// straight path `(Q + tQ̇, f + tḟ)` with dual numbers.
pub fn split_velocity_by_path<S: MechanicalSystem>(sys: &S, s: &FullState, guess: &[f64], opts: &GaugeOptions) -> Result<VelocitySplit> {
    let np = sys.dim_p();
    let z: Vec<f64> = s.q.iter().chain(&s.f).copied().collect();
    let zd = dual::seed_direction(&z, &s.velocity());
    let (q_star, f_tilde, a) = decompose_generic(sys, &zd[..np], &zd[np..], Some(&dual::constants(guess)), opts)?;
    let a_re = dual::values(&a);
    let xi = sys.group().u(&a_re).matvec(&dual::tangents(&a));
    Ok(VelocitySplit { q_star_dot: dual::tangents(&q_star), f_tilde_dot: dual::tangents(&f_tilde), xi })
}

/// Matched reduced initial data: decompose the point, split the velocity,
/// then `ω^α = ξ + ρ̄ 𝒜 ẋ` and `p = d ρ ω^α`.
pub fn reduce_initial<S: MechanicalSystem>(sys: &S, s: &FullState, opts: &GaugeOptions) -> Result<ReducedState> {
    s.check_dims(sys)?;
    let g = sys.group();
    let pt = decompose(sys, &s.q, &s.f, None, opts)?;
    let v = split_velocity(sys, s, &pt.q_star, &pt.a)?;
    let ps = ProjectorSet::new(sys, &pt.q_star, &pt.f_tilde)?;
    let xdot: Vec<f64> = v.q_star_dot.iter().chain(&v.f_tilde_dot).copied().collect();
    let hor = g.rho_bar(&pt.a).matvec(&potentials(&ps).matvec(&xdot));
    let omega_g: Vec<f64> = v.xi.iter().zip(&hor).map(|(a, b)| a + b).collect();
    let p = ps.d.matvec(&g.rho(&pt.a).matvec(&omega_g));
    Ok(ReducedState {
        omega_p: ps.p_perp.matvec(&v.q_star_dot),
        omega_v: v.f_tilde_dot,
        q_star: pt.q_star,
        f_tilde: pt.f_tilde,
        p,
        a: pt.a,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareTolerances {
    pub shape: f64,
    pub reconstruction: f64,
    pub energy: f64,
    pub momentum: f64,
}

impl Default for CompareTolerances {
    fn default() -> Self {
        CompareTolerances { shape: 1e-5, reconstruction: 1e-4, energy: 1e-7, momentum: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub max: f64,
    pub mean: f64,
}

impl Channel {
    fn from(values: &[f64]) -> Self {
        let max = values.iter().cloned().fold(0.0, f64::max);
        let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 };
        Channel { max, mean }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub system: String,
    pub dt: f64,
    pub t_end: f64,
    pub steps_compared: usize,
    /// `‖(Q*, f̃)_reduced − (Q*, f̃)_decomposed‖∞`.
    pub shape: Channel,
    pub reconstruction: Channel,
    /// Reduced energy against full energy at the same time.
    pub energy_match: Channel,
    /// `ρᵀp` against the full Noether momentum.
    pub momentum_match: Channel,
    pub full_energy_drift: f64,
    pub full_momentum_drift: f64,
    pub reduced_energy_drift: f64,
    pub reduced_invariant_drift: f64,
    pub reprojections: usize,
    pub tolerances: CompareTolerances,
    pub passed: bool,
    pub failure: Option<String>,
}

pub struct Comparison {
    pub report: ComparisonReport,
    pub full: FullTrajectory,
    pub reduced: Trajectory,
    /// Decomposed full trajectory, one row `(Q*, f̃, a)` per compared step.
    pub decomposed: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

pub fn compare<S: MechanicalSystem>(
    sys: &S,
    initial: &FullState,
    opts: &IntegrateOptions,
    tol: &CompareTolerances,
) -> Result<Comparison> {
    let reduced0 = reduce_initial(sys, initial, &opts.gauge)?;
    let full = integrate_full(sys, initial, opts.dt, opts.t_end)?;
    let reduced = integrate(sys, &reduced0, opts)?;
    let n = full.states.len().min(reduced.states.len());
    let mut shape = Vec::with_capacity(n);
    let mut recon = Vec::with_capacity(n);
    let mut emat = Vec::with_capacity(n);
    let mut jmat = Vec::with_capacity(n);
    let mut decomposed = Vec::with_capacity(n);
    let mut failure = full.failure.clone().or_else(|| reduced.failure.clone());
    let mut guess = reduced0.a.clone();
    for i in 0..n {
        let fs = &full.states[i];
        let rs = &reduced.states[i];
        let pt = match decompose(sys, &fs.q, &fs.f, Some(&guess), &opts.gauge) {
            Ok(p) => p,
            Err(e) => {
                failure.get_or_insert_with(|| format!("decomposition at t = {}: {e}", full.times[i]));
                break;
            }
        };
        shape.push(max_abs_diff(&pt.q_star, &rs.q_star).max(max_abs_diff(&pt.f_tilde, &rs.f_tilde)));
        recon.push(max_abs_diff(&pt.a, &rs.a));
        emat.push((full.energy[i] - reduced.energy[i]).abs() / full.energy[i].abs().max(1e-300));
        jmat.push(max_abs_diff(&full.momentum[i], &reduced.invariant[i]));
        guess = pt.a.clone();
        decomposed.push((pt.q_star, pt.f_tilde, pt.a));
    }
    let report = ComparisonReport {
        system: sys.name().to_string(),
        dt: opts.dt,
        t_end: opts.t_end,
        steps_compared: shape.len(),
        shape: Channel::from(&shape),
        reconstruction: Channel::from(&recon),
        energy_match: Channel::from(&emat),
        momentum_match: Channel::from(&jmat),
        full_energy_drift: full.energy_drift(),
        full_momentum_drift: full.momentum_drift(),
        reduced_energy_drift: reduced.energy_drift(),
        reduced_invariant_drift: reduced.invariant_drift(),
        reprojections: reduced.reprojections,
        tolerances: *tol,
        passed: false,
        failure,
    };
    let passed = report.failure.is_none()
        && report.shape.max < tol.shape
        && report.reconstruction.max < tol.reconstruction
        && report.reduced_energy_drift < tol.energy
        && report.reduced_invariant_drift < tol.momentum;
    Ok(Comparison { report: ComparisonReport { passed, ..report }, full, reduced, decomposed })
}
