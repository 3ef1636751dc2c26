//! Reduced Lagrange–Poincaré equations in adapted coordinates, integrated
//! with classical RK4 and monitored for the conserved quantities.

use std::io::Write;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::connection::GeometryCache;
use crate::error::{Error, Result};
use crate::gauge::{gauge_residual, reproject, GaugeOptions};
use crate::scalar::{max_abs, Scalar};
use crate::system::{action_jacobian, rep, MechanicalSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub q_star: Vec<f64>,
    pub f_tilde: Vec<f64>,
    /// `ω^A`, tangent to the slice.
    pub omega_p: Vec<f64>,
    /// `ω^p = df̃/dt`.
    pub omega_v: Vec<f64>,
    /// Vertical momentum `p_α`.
    pub p: Vec<f64>,
    /// Reconstruction variable.
    pub a: Vec<f64>,
}

impl ReducedState {
    pub fn omega(&self) -> Vec<f64> {
        self.omega_p.iter().chain(&self.omega_v).copied().collect()
    }

    fn sizes(&self) -> [usize; 6] {
        [self.q_star.len(), self.f_tilde.len(), self.omega_p.len(), self.omega_v.len(), self.p.len(), self.a.len()]
    }

    pub fn to_flat(&self) -> Vec<f64> {
        [&self.q_star, &self.f_tilde, &self.omega_p, &self.omega_v, &self.p, &self.a]
            .into_iter()
            .flat_map(|v| v.iter().copied())
            .collect()
    }

    pub fn from_flat(shape: &ReducedState, x: &[f64]) -> Self {
        let mut parts = Vec::with_capacity(6);
        let mut at = 0;
        for n in shape.sizes() {
            parts.push(x[at..at + n].to_vec());
            at += n;
        }
        let mut it = parts.into_iter();
        let mut next = || it.next().unwrap_or_default();
        ReducedState { q_star: next(), f_tilde: next(), omega_p: next(), omega_v: next(), p: next(), a: next() }
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|x| x.is_finite())
    }
}

/// Second-order part of the reduced equations: `(dω^Ã/dt, dp_β/dt)`.
///
/// The horizontal equations fix the `N`-projected acceleration
/// `N dω/dt = −Ǧ F`; the component along the orbit directions inside `Q*`
/// is closed by differentiating the tangency condition `χ^μ_A ω^A = 0`.
pub fn accelerations<T: Scalar>(gc: &GeometryCache<T>, g: &crate::lie_group::LieGroup, omega: &[T], p: &[T]) -> (Vec<T>, Vec<T>) {
    let np = gc.dim_p();
    let ng = gc.dim_g();
    let ps = &gc.ps;
    let force: Vec<T> = {
        let a = gc.christoffel_contract(omega);
        let b = gc.magnetic(omega, p);
        let c = gc.amended_gradient(p);
        (0..omega.len()).map(|t| a[t] + b[t] + c[t]).collect()
    };
    let y: Vec<T> = gc.g_check.matvec(&force).into_iter().map(|x| -x).collect();
    let closure: Vec<T> = gc.chi_hessian.iter().map(|h| h.bilinear(&omega[..np], &omega[..np])).collect();
    let corr = ps.k_p.matvec(&ps.phi_inv.matvec(&closure));
    let acc_p: Vec<T> = (0..np).map(|i| y[i] - corr[i]).collect();
    let nvp = ps.n_vp.matvec(&acc_p);
    let mut acc = acc_p;
    acc.extend((np..omega.len()).map(|i| y[i] - nvp[i - np]));

    // dp_β/dt = −c^ν_{μβ} d^{μσ} p_σ p_ν + c^ν_{σβ} 𝒜^σ_Ẽ ω^Ẽ p_ν
    let dp_up = ps.d_inv.matvec(p);
    let a_omega = gc.potentials.matvec(omega);
    let pdot = (0..ng)
        .map(|beta| {
            let mut s = T::zero();
            for nu in 0..ng {
                for mu in 0..ng {
                    let c = g.c(nu, mu, beta);
                    if c != 0.0 {
                        s += T::from_f64(c) * (a_omega[mu] - dp_up[mu]) * p[nu];
                    }
                }
            }
            s
        })
        .collect();
    (acc, pdot)
}

/// `da/dt = v(a)(ω_vert − 𝒜̃ ω)` with `ω_vert = ρ̄ d⁻¹ p`.
pub fn reconstruction_rate<T: Scalar>(
    gc: &GeometryCache<T>,
    g: &crate::lie_group::LieGroup,
    a: &[T],
    omega: &[T],
    p: &[T],
) -> Result<Vec<T>> {
    let rb = g.rho_bar(a);
    let vert = rb.matvec(&gc.ps.d_inv.matvec(p));
    let hor = gc.potentials_tilde(&rb).matvec(omega);
    let diff: Vec<T> = vert.iter().zip(&hor).map(|(&x, &y)| x - y).collect();
    Ok(g.v(a)?.matvec(&diff))
}

/// Time derivative of a reduced state, packaged with the same layout.
pub fn rhs<S: MechanicalSystem>(sys: &S, s: &ReducedState) -> Result<ReducedState> {
    let g = sys.group();
    g.check_chart(&s.a)?;
    let gc = GeometryCache::new(sys, &s.q_star, &s.f_tilde)?;
    let omega = s.omega();
    let (acc, pdot) = accelerations(&gc, g, &omega, &s.p);
    let adot = reconstruction_rate(&gc, g, &s.a, &omega, &s.p)?;
    let np = s.q_star.len();
    Ok(ReducedState {
        q_star: s.omega_p.clone(),
        f_tilde: s.omega_v.clone(),
        omega_p: acc[..np].to_vec(),
        omega_v: acc[np..].to_vec(),
        p: pdot,
        a: adot,
    })
}

/// `E = ½(Gᴴ ω ω + d⁻¹ p p) + V`.
pub fn energy<S: MechanicalSystem>(sys: &S, s: &ReducedState) -> Result<f64> {
    let ps = crate::gauge::ProjectorSet::new(sys, &s.q_star, &s.f_tilde)?;
    let gh = crate::connection::horizontal_metric(&ps);
    let w = s.omega();
    Ok(0.5 * (gh.bilinear(&w, &w) + ps.d_inv.bilinear(&s.p, &s.p)) + sys.potential(&s.q_star, &s.f_tilde))
}

/// Conserved covector `ρ^ν_α p_ν`.
pub fn vertical_invariant<S: MechanicalSystem>(sys: &S, s: &ReducedState) -> Vec<f64> {
    sys.group().rho(&s.a).vecmat(&s.p)
}

/// `‖χ^μ_A ω^A‖∞`.
pub fn tangency_residual<S: MechanicalSystem>(sys: &S, s: &ReducedState) -> f64 {
    max_abs(&crate::system::gauge_jacobian(sys, &s.q_star).matvec(&s.omega_p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub t_end: f64,
    pub gauge: GaugeOptions,
    /// Re-project onto the slice after a step when the gauge residual
    /// exceeds `10 × gauge.tol`.
    pub stabilize: bool,
}

impl IntegrateOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        IntegrateOptions { dt, t_end, gauge: GaugeOptions::default(), stabilize: true }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Precondition(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Precondition(format!("t_end must be positive, got {}", self.t_end)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub system: String,
    pub times: Vec<f64>,
    pub states: Vec<ReducedState>,
    pub energy: Vec<f64>,
    pub invariant: Vec<Vec<f64>>,
    pub gauge_residual: Vec<f64>,
    pub tangency_residual: Vec<f64>,
    pub reprojections: usize,
    /// Set when integration stopped early.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &ReducedState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        let scale = e0.abs().max(1e-300);
        self.energy.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max)
    }

    /// Largest absolute deviation of the conserved covector.
    pub fn invariant_drift(&self) -> f64 {
        let j0 = &self.invariant[0];
        self.invariant.iter().map(|j| crate::linalg::max_abs_diff(j, j0)).fold(0.0, f64::max)
    }

    pub fn csv_header(&self) -> Vec<String> {
        let s = &self.states[0];
        let mut h = vec!["t".to_string()];
        let groups: [(&str, usize); 6] = [
            ("q_star", s.q_star.len()),
            ("f_tilde", s.f_tilde.len()),
            ("omega_p", s.omega_p.len()),
            ("omega_v", s.omega_v.len()),
            ("p", s.p.len()),
            ("a", s.a.len()),
        ];
        for (name, n) in groups {
            h.extend((0..n).map(|i| format!("{name}_{i}")));
        }
        h.push("energy".into());
        h.extend((0..s.p.len()).map(|i| format!("invariant_{i}")));
        h.push("gauge_residual".into());
        h.push("tangency_residual".into());
        h
    }

    /// One row per step: `t`, the state blocks in declaration order, then
    /// the monitors.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.csv_header().join(","))?;
        for (i, s) in self.states.iter().enumerate() {
            let mut row = vec![self.times[i]];
            row.extend(s.to_flat());
            row.push(self.energy[i]);
            row.extend(&self.invariant[i]);
            row.push(self.gauge_residual[i]);
            row.push(self.tangency_residual[i]);
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn rk4_step<S: MechanicalSystem>(sys: &S, s: &ReducedState, dt: f64) -> Result<ReducedState> {
    let x = s.to_flat();
    let shifted = |k: &[f64], h: f64| -> ReducedState {
        let y: Vec<f64> = x.iter().zip(k).map(|(a, b)| a + h * b).collect();
        ReducedState::from_flat(s, &y)
    };
    let k1 = rhs(sys, s)?.to_flat();
    let k2 = rhs(sys, &shifted(&k1, 0.5 * dt))?.to_flat();
    let k3 = rhs(sys, &shifted(&k2, 0.5 * dt))?.to_flat();
    let k4 = rhs(sys, &shifted(&k3, dt))?.to_flat();
    let y: Vec<f64> =
        (0..x.len()).map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    let out = ReducedState::from_flat(s, &y);
    if !out.is_finite() {
        return Err(Error::NonFinite("reduced state after RK4 step".into()));
    }
    sys.group().check_chart(&out.a)?;
    Ok(out)
}

/// Move the state back onto the slice along its orbit without changing the
/// physical configuration, velocity or conserved covector.
pub fn stabilize<S: MechanicalSystem>(sys: &S, s: &ReducedState, opts: &GaugeOptions) -> Result<ReducedState> {
    let g = sys.group();
    let (q_new, b) = reproject(sys, &s.q_star, opts)?;
    let binv = g.inverse(&b);
    let ps = crate::gauge::ProjectorSet::new(sys, &q_new, &s.f_tilde)?;
    let moved = action_jacobian(sys, &s.q_star, &binv)?.matvec(&s.omega_p);
    let db = rep(sys, &b);
    Ok(ReducedState {
        omega_p: ps.p_perp.matvec(&moved),
        f_tilde: db.matvec(&s.f_tilde),
        omega_v: db.matvec(&s.omega_v),
        p: g.rho_bar(&b).vecmat(&s.p),
        a: g.multiply(&b, &s.a)?,
        q_star: q_new,
    })
}

/// Fixed-step RK4. A failure mid-run truncates the trajectory and records
/// the reason instead of discarding the steps already taken.
pub fn integrate<S: MechanicalSystem>(sys: &S, initial: &ReducedState, opts: &IntegrateOptions) -> Result<Trajectory> {
    opts.validate()?;
    if initial.q_star.len() != sys.dim_p()
        || initial.f_tilde.len() != sys.dim_v()
        || initial.omega_p.len() != sys.dim_p()
        || initial.omega_v.len() != sys.dim_v()
        || initial.p.len() != sys.group().dim()
        || initial.a.len() != sys.group().dim()
    {
        return Err(Error::Precondition("reduced state dimensions do not match the system".into()));
    }
    let mut traj = Trajectory {
        system: sys.name().to_string(),
        times: Vec::new(),
        states: Vec::new(),
        energy: Vec::new(),
        invariant: Vec::new(),
        gauge_residual: Vec::new(),
        tangency_residual: Vec::new(),
        reprojections: 0,
        failure: None,
    };
    let record = |traj: &mut Trajectory, t: f64, s: ReducedState| -> Result<()> {
        traj.energy.push(energy(sys, &s)?);
        traj.invariant.push(vertical_invariant(sys, &s));
        traj.gauge_residual.push(gauge_residual(sys, &s.q_star));
        traj.tangency_residual.push(tangency_residual(sys, &s));
        traj.times.push(t);
        traj.states.push(s);
        Ok(())
    };
    record(&mut traj, 0.0, initial.clone())?;
    let steps = opts.steps();
    let mut s = initial.clone();
    for i in 1..=steps {
        let t = i as f64 * opts.dt;
        let step = rk4_step(sys, &s, opts.dt).and_then(|mut next| {
            if opts.stabilize && gauge_residual(sys, &next.q_star) > 10.0 * opts.gauge.tol {
                next = stabilize(sys, &next, &opts.gauge)?;
                debug!("t = {t}: gauge re-projection");
                Ok((next, true))
            } else {
                Ok((next, false))
            }
        });
        match step.and_then(|(next, re)| record(&mut traj, t, next.clone()).map(|_| (next, re))) {
            Ok((next, re)) => {
                traj.reprojections += re as usize;
                s = next;
            }
            Err(e) => {
                warn!("reduced integration stopped at t = {t}: {e}");
                traj.failure = Some(format!("t = {t}: {e}"));
                break;
            }
        }
    }
    Ok(traj)
}
