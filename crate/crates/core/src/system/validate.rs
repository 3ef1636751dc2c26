use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::Mat;
use crate::sampling::Sampler;

use super::{action_jacobian, rep_bar, MechanicalSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// `value` must not exceed `tolerance`.
    Max,
    /// `value` must be at least `tolerance`.
    Min,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub system: String,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tracker {
    name: &'static str,
    bound: Bound,
    tolerance: f64,
    value: f64,
    note: Option<String>,
}

impl Tracker {
    fn max(name: &'static str, tolerance: f64) -> Self {
        Tracker { name, bound: Bound::Max, tolerance, value: 0.0, note: None }
    }

    fn min(name: &'static str, tolerance: f64) -> Self {
        Tracker { name, bound: Bound::Min, tolerance, value: f64::INFINITY, note: None }
    }

    fn record(&mut self, v: f64) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        self.value = match self.bound {
            Bound::Max => self.value.max(v),
            Bound::Min => self.value.min(v),
        };
    }

    fn fail(&mut self, e: &Error) {
        self.value = match self.bound {
            Bound::Max => f64::INFINITY,
            Bound::Min => f64::NEG_INFINITY,
        };
        self.note.get_or_insert_with(|| e.to_string());
    }

    fn record_result(&mut self, r: Result<f64>) {
        match r {
            Ok(v) => self.record(v),
            Err(e) => self.fail(&e),
        }
    }

    fn finish(self) -> Check {
        let passed = match self.bound {
            Bound::Max => self.value <= self.tolerance,
            Bound::Min => self.value >= self.tolerance,
        };
        Check {
            name: self.name.to_string(),
            value: self.value,
            tolerance: self.tolerance,
            bound: self.bound,
            passed,
            note: self.note,
        }
    }
}

fn min_eigenvalue(m: &Mat<f64>) -> f64 {
    let sym = m.symmetrize().to_nalgebra();
    let asym = m.max_abs_diff(&m.transpose());
    let e = sym.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if asym > 1e-12 {
        f64::NEG_INFINITY
    } else {
        e
    }
}

/// Check every structural assumption on random samples drawn from the
/// system's sample box. Never aborts on a failing sample; the failure is
/// recorded in the report instead.
pub fn validate<S: MechanicalSystem>(sys: &S, samples: usize, seed: u64) -> Result<ValidationReport> {
    if samples == 0 {
        return Err(Error::Precondition("validation needs at least one sample".into()));
    }
    let g = sys.group();
    let n = g.dim();
    let bx = sys.sample_box().clone();
    let mut rng = Sampler::new(seed);

    let mut jacobi = Tracker::max("group_jacobi", 1e-12);
    jacobi.record(g.jacobi_residual());

    let mut commutators = Tracker::max("rep_commutators", 1e-12);
    let gens = sys.rep_generators();
    for a in 0..n {
        for b in 0..n {
            let lhs = &gens[a].matmul(&gens[b]) - &gens[b].matmul(&gens[a]);
            let mut rhs = Mat::zeros(sys.dim_v(), sys.dim_v());
            for (c, j) in gens.iter().enumerate() {
                rhs = &rhs + &j.scale(-g.c(c, a, b));
            }
            commutators.record(lhs.max_abs_diff(&rhs));
        }
    }

    let mut metric_v_pd = Tracker::min("metric_v_positive", 1e-12);
    metric_v_pd.record(min_eigenvalue(sys.metric_v()));

    let mut identity = Tracker::max("action_identity", 1e-12);
    let mut composition = Tracker::max("action_composition", 1e-9);
    let mut iso_p = Tracker::max("metric_p_isometry", 1e-9);
    let mut iso_v = Tracker::max("metric_v_isometry", 1e-9);
    let mut pot = Tracker::max("potential_invariance", 1e-9);
    let mut killing_fd = Tracker::max("killing_fd", 1e-6);
    let mut transport = Tracker::max("killing_transport", 1e-6);
    let mut metric_pd = Tracker::min("metric_p_positive", 1e-12);
    let mut free = Tracker::min("free_action", 1e-8);

    let gv = sys.metric_v();
    for _ in 0..samples {
        let q = rng.in_box(&bx.q);
        let f = rng.in_box(&bx.f);
        let a = rng.in_ball(n, bx.group_radius);
        let b = rng.in_ball(n, bx.group_radius);

        identity.record_result(
            sys.action(&q, &g.identity::<f64>()).map(|x| crate::linalg::max_abs_diff(&x, &q)),
        );
        composition.record_result((|| {
            let lhs = sys.action(&sys.action(&q, &a)?, &b)?;
            let rhs = sys.action(&q, &g.multiply(&a, &b)?)?;
            Ok(crate::linalg::max_abs_diff(&lhs, &rhs))
        })());

        let gq = sys.metric_p(&q);
        metric_pd.record(min_eigenvalue(&gq));
        iso_p.record_result((|| {
            let fq = action_jacobian(sys, &q, &a)?;
            let moved = sys.metric_p(&sys.action(&q, &a)?);
            Ok(gq.max_abs_diff(&fq.transpose().matmul(&moved).matmul(&fq)))
        })());

        let dbar = rep_bar(sys, &a);
        iso_v.record(gv.max_abs_diff(&dbar.transpose().matmul(gv).matmul(&dbar)));

        pot.record_result((|| {
            let moved_q = sys.action(&q, &a)?;
            let moved_f = dbar.matvec(&f);
            Ok((sys.potential(&q, &f) - sys.potential(&moved_q, &moved_f)).abs())
        })());

        killing_fd.record_result((|| {
            let k = sys.killing_p(&q)?;
            let jac = fd::jacobian(&g.identity::<f64>(), fd::STEP, |x| {
                sys.action(&q, x).unwrap_or_else(|_| vec![f64::NAN; q.len()])
            });
            Ok(k.max_abs_diff(&Mat::from_rows(&jac)))
        })());

        transport.record_result((|| {
            // F_Q(Q,a) K(Q) = K(F(Q,a)) ρ̄(a)
            let lhs = action_jacobian(sys, &q, &a)?.matmul(&sys.killing_p(&q)?);
            let rhs = sys.killing_p(&sys.action(&q, &a)?)?.matmul(&g.rho_bar(&a));
            Ok(lhs.max_abs_diff(&rhs))
        })());

        free.record_result(sys.killing_p(&q).map(|k| {
            let sv = k.to_nalgebra().singular_values();
            sv.iter().cloned().fold(f64::INFINITY, f64::min)
        }));
    }

    let checks: Vec<Check> = [
        jacobi,
        commutators,
        metric_v_pd,
        identity,
        composition,
        iso_p,
        iso_v,
        pot,
        killing_fd,
        transport,
        metric_pd,
        free,
    ]
    .into_iter()
    .map(Tracker::finish)
    .collect();
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { system: sys.name().to_string(), samples, seed, checks, passed })
}
