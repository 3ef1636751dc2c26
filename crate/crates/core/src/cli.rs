//! Command-line front end: config loading, command dispatch and output files.
//!
//! Output files (all written atomically into `--out`):
//!
//! | command         | files                                   |
//! |-----------------|-----------------------------------------|
//! | `check`         | `check.json`                            |
//! | `simulate`      | `trajectory.csv`, `trajectory.json`     |
//! | `compare`       | `compare.json`, `compare.csv`           |
//! | `equilibria`    | `equilibria.json`                       |
//! | `derive-report` | `derive-report.json`                    |
//!
//! `trajectory.csv` columns: `t`, `q_star_*`, `f_tilde_*`, `omega_p_*`,
//! `omega_v_*`, `p_*`, `a_*`, `energy`, `invariant_*`, `gauge_residual`,
//! `tangency_residual`.
//!
//! `compare.csv` columns: `t`, `shape_error`, `reconstruction_error`,
//! `full_energy`, `reduced_energy`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::connection::GeometryCache;
use crate::dynamics::{integrate, IntegrateOptions};
use crate::equilibria::{self, EquilibriumOptions, RelativeEquilibrium};
use crate::error::{Error, Result};
use crate::gauge::{decompose, GaugeOptions, ProjectorSet};
use crate::linalg::{max_abs_diff, Mat};
use crate::oracle::{self, CompareTolerances, FullState};
use crate::sampling::{Sampler, DEFAULT_SEED};
use crate::system::{validate, AnySystem, Bound, Check, MechanicalSystem, SystemSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub gauge: f64,
    pub projector: f64,
    pub shape: f64,
    pub reconstruction: f64,
    pub energy: f64,
    pub momentum: f64,
    pub equilibrium: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gauge: 1e-12,
            projector: 1e-10,
            shape: 1e-5,
            reconstruction: 1e-4,
            energy: 1e-7,
            momentum: 1e-7,
            equilibrium: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub q: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriaConfig {
    pub seeds: Vec<PointConfig>,
    #[serde(default)]
    pub p_magnitude: f64,
    #[serde(default)]
    pub eigen_index: usize,
    #[serde(default = "default_verify_t")]
    pub verify_t: f64,
    #[serde(default = "default_verify_dt")]
    pub verify_dt: f64,
}

fn default_verify_t() -> f64 {
    1.0
}

fn default_verify_dt() -> f64 {
    1e-2
}

/// A run configuration as stored in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<FullState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibria: Option<EquilibriaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(path, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config(path, format!("cannot read: {e}")))?;
        Self::from_json(&text, path)
    }
}

#[derive(Debug, Parser)]
#[command(name = "lp-reduce", version, about = "Reduced Lagrange–Poincaré dynamics in gauge coordinates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    #[arg(long = "tol-gauge", global = true)]
    pub tol_gauge: Option<f64>,
    #[arg(long = "tol-projector", global = true)]
    pub tol_projector: Option<f64>,
    #[arg(long = "tol-shape", global = true)]
    pub tol_shape: Option<f64>,
    #[arg(long = "tol-reconstruction", global = true)]
    pub tol_reconstruction: Option<f64>,
    #[arg(long = "tol-energy", global = true)]
    pub tol_energy: Option<f64>,
    #[arg(long = "tol-momentum", global = true)]
    pub tol_momentum: Option<f64>,
    #[arg(long = "tol-equilibrium", global = true)]
    pub tol_equilibrium: Option<f64>,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Validate the system and the projector/connection identities.
    Check,
    /// Integrate the reduced equations from the configured initial state.
    Simulate,
    /// Integrate full and reduced systems and compare them.
    Compare,
    /// Solve for relative equilibria from the configured seeds.
    Equilibria,
    /// Dump the geometry at the configured point.
    DeriveReport,
}

/// Resolved settings after merging flags over the config file.
struct Settings {
    path: PathBuf,
    cfg: RunConfig,
    seed: u64,
    dt: f64,
    t_end: f64,
    tol: Tolerances,
}

fn positive(value: f64, field: &str, path: &Path) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::config(path, format!("{field}: must be positive, got {value}")))
    }
}

fn resolve(cli: &Cli) -> Result<Settings> {
    let path = cli.config.clone().ok_or_else(|| Error::config("--config", "a run configuration is required"))?;
    let cfg = RunConfig::load(&path)?;
    let mut tol = cfg.tolerances.unwrap_or_default();
    let flags = [
        (cli.tol_gauge, &mut tol.gauge, "tolerances.gauge"),
        (cli.tol_projector, &mut tol.projector, "tolerances.projector"),
        (cli.tol_shape, &mut tol.shape, "tolerances.shape"),
        (cli.tol_reconstruction, &mut tol.reconstruction, "tolerances.reconstruction"),
        (cli.tol_energy, &mut tol.energy, "tolerances.energy"),
        (cli.tol_momentum, &mut tol.momentum, "tolerances.momentum"),
        (cli.tol_equilibrium, &mut tol.equilibrium, "tolerances.equilibrium"),
    ];
    for (flag, slot, field) in flags {
        if let Some(v) = flag {
            *slot = v;
        }
        positive(*slot, field, &path)?;
    }
    let dt = positive(cli.dt.or(cfg.dt).unwrap_or(1e-3), "dt", &path)?;
    let t_end = positive(cli.t_end.or(cfg.t_end).unwrap_or(1.0), "t_end", &path)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    Ok(Settings { path, cfg, seed, dt, t_end, tol })
}

/// Write `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &target)?;
    Ok(target)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::NonFinite(format!("serialization: {e}")))?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let s = resolve(cli)?;
    let sys = s.cfg.system.build(&s.path)?;
    info!("{:?} on '{}'", cli.command, sys.name());
    match cli.command {
        Command::Check => run_check(&sys, &s, &cli.out),
        Command::Simulate => run_simulate(&sys, &s, &cli.out),
        Command::Compare => run_compare(&sys, &s, &cli.out),
        Command::Equilibria => run_equilibria(&sys, &s, &cli.out),
        Command::DeriveReport => run_derive(&sys, &s, &cli.out),
    }
}

/// Map a run result to the documented exit status.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed => EXIT_OK,
        Ok(_) => EXIT_ACCEPTANCE,
        Err(e) if e.is_config() => EXIT_CONFIG,
        Err(_) => EXIT_NUMERIC,
    }
}

fn gauge_opts(s: &Settings) -> GaugeOptions {
    GaugeOptions { tol: s.tol.gauge, ..GaugeOptions::default() }
}

fn initial_state(s: &Settings, sys: &AnySystem) -> Result<FullState> {
    let init = s.cfg.initial.clone().ok_or_else(|| Error::config(&s.path, "initial: required for this command"))?;
    init.check_dims(sys).map_err(|e| match e {
        Error::Config { message, .. } => Error::config(&s.path, message),
        other => other,
    })?;
    Ok(init)
}

fn point(s: &Settings, sys: &AnySystem, field: &str, p: &PointConfig) -> Result<()> {
    if p.q.len() != sys.dim_p() {
        return Err(Error::config(&s.path, format!("{field}.q: expected {} components, got {}", sys.dim_p(), p.q.len())));
    }
    if p.f.len() != sys.dim_v() {
        return Err(Error::config(&s.path, format!("{field}.f: expected {} components, got {}", sys.dim_v(), p.f.len())));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
struct CheckReport {
    system: String,
    seed: u64,
    samples: usize,
    checks: Vec<Check>,
    passed: bool,
}

fn max_check(name: &str, value: f64, tolerance: f64) -> Check {
    let value = if value.is_nan() { f64::INFINITY } else { value };
    Check {
        name: name.into(),
        value,
        tolerance,
        bound: Bound::Max,
        passed: value <= tolerance,
        note: None,
    }
}

fn run_check(sys: &AnySystem, s: &Settings, out: &Path) -> Result<Outcome> {
    let samples = s.cfg.samples.unwrap_or(50);
    if samples == 0 {
        return Err(Error::config(&s.path, "samples: must be at least 1"));
    }
    let report = validate(sys, samples, s.seed)?;
    let mut checks = report.checks;
    let tol = s.tol.projector;
    let bx = sys.sample_box().clone();
    let mut rng = Sampler::new(s.seed.wrapping_add(1));
    let mut proj: Vec<(String, f64)> = Vec::new();
    let mut note = None;
    let mut rank_ok = true;
    for _ in 0..samples {
        let q = rng.in_box(&bx.q);
        let f = rng.in_box(&bx.f);
        let res = (|| -> Result<Vec<(String, f64)>> {
            let pt = decompose(sys, &q, &f, None, &gauge_opts(s))?;
            let ps = ProjectorSet::new(sys, &pt.q_star, &pt.f_tilde)?;
            let pr = ps.residuals();
            rank_ok &= pr.n_rank == pr.n_expected_rank && pr.d_min_eigenvalue > 0.0;
            let gc = GeometryCache::new(sys, &pt.q_star, &pt.f_tilde)?;
            let gr = gc.residuals(sys.group());
            let mut v = Vec::new();
            for (prefix, value) in
                [("projector", serde_json::to_value(&pr)), ("connection", serde_json::to_value(&gr))]
            {
                let map = value.map_err(|e| Error::NonFinite(e.to_string()))?;
                for (k, x) in map.as_object().into_iter().flatten() {
                    if matches!(
                        k.as_str(),
                        "n_rank" | "n_expected_rank" | "ext_dim" | "d_min_eigenvalue" | "horizontal_metric_min_eigenvalue"
                    ) {
                        continue;
                    }
                    v.push((format!("{prefix}.{k}"), x.as_f64().unwrap_or(f64::INFINITY)));
                }
            }
            v.push(("connection.horizontal_metric_negative_part".into(), (-gr.horizontal_metric_min_eigenvalue).max(0.0)));
            Ok(v)
        })();
        match res {
            Ok(v) => {
                for (k, x) in v {
                    match proj.iter_mut().find(|(n, _)| *n == k) {
                        Some(e) => e.1 = e.1.max(x),
                        None => proj.push((k, x)),
                    }
                }
            }
            Err(e) => {
                note.get_or_insert_with(|| e.to_string());
                rank_ok = false;
            }
        }
    }
    for (k, x) in proj {
        checks.push(max_check(&k, x, tol));
    }
    let mut rank = max_check("projector.rank_and_orbit_metric", if rank_ok { 0.0 } else { 1.0 }, 0.0);
    rank.note = note;
    checks.push(rank);
    let passed = checks.iter().all(|c| c.passed);
    let report = CheckReport { system: sys.name().to_string(), seed: s.seed, samples, checks, passed };
    let file = write_json(out, "check.json", &report)?;
    Ok(Outcome { passed, files: vec![file] })
}

fn run_simulate(sys: &AnySystem, s: &Settings, out: &Path) -> Result<Outcome> {
    let init = initial_state(s, sys)?;
    let opts = IntegrateOptions { gauge: gauge_opts(s), ..IntegrateOptions::new(s.dt, s.t_end) };
    let r0 = oracle::reduce_initial(sys, &init, &opts.gauge)?;
    let traj = integrate(sys, &r0, &opts)?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    let a = write_atomic(out, "trajectory.csv", &csv)?;
    let meta = json!({
        "system": traj.system,
        "dt": s.dt,
        "t_end": s.t_end,
        "seed": s.seed,
        "columns": traj.csv_header(),
        "energy_drift": traj.energy_drift(),
        "invariant_drift": traj.invariant_drift(),
        "reprojections": traj.reprojections,
        "failure": traj.failure,
        "times": traj.times,
        "states": traj.states,
        "energy": traj.energy,
        "invariant": traj.invariant,
        "gauge_residual": traj.gauge_residual,
        "tangency_residual": traj.tangency_residual,
    });
    let b = write_json(out, "trajectory.json", &meta)?;
    if let Some(f) = &traj.failure {
        return Err(Error::Precondition(format!("integration truncated: {f}")));
    }
    Ok(Outcome { passed: true, files: vec![a, b] })
}

fn run_compare(sys: &AnySystem, s: &Settings, out: &Path) -> Result<Outcome> {
    let init = initial_state(s, sys)?;
    let opts = IntegrateOptions { gauge: gauge_opts(s), ..IntegrateOptions::new(s.dt, s.t_end) };
    let tol = CompareTolerances {
        shape: s.tol.shape,
        reconstruction: s.tol.reconstruction,
        energy: s.tol.energy,
        momentum: s.tol.momentum,
    };
    let c = oracle::compare(sys, &init, &opts, &tol)?;
    let mut csv = String::from("t,shape_error,reconstruction_error,full_energy,reduced_energy\n");
    for (i, (q, f, a)) in c.decomposed.iter().enumerate() {
        let rs = &c.reduced.states[i];
        let shape = max_abs_diff(q, &rs.q_star).max(max_abs_diff(f, &rs.f_tilde));
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            c.full.times[i],
            shape,
            max_abs_diff(a, &rs.a),
            c.full.energy[i],
            c.reduced.energy[i]
        ));
    }
    let a = write_json(out, "compare.json", &c.report)?;
    let b = write_atomic(out, "compare.csv", csv.as_bytes())?;
    Ok(Outcome { passed: c.report.passed, files: vec![a, b] })
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
enum SeedResult {
    Found(Box<RelativeEquilibrium>),
    Failed { seed: PointConfig, error: String },
}

fn run_equilibria(sys: &AnySystem, s: &Settings, out: &Path) -> Result<Outcome> {
    let eq = s.cfg.equilibria.clone().ok_or_else(|| Error::config(&s.path, "equilibria: required for this command"))?;
    if eq.seeds.is_empty() {
        return Err(Error::config(&s.path, "equilibria.seeds: at least one seed is required"));
    }
    if eq.eigen_index >= sys.group().dim() {
        return Err(Error::config(&s.path, format!("equilibria.eigen_index: must be below {}", sys.group().dim())));
    }
    for (i, p) in eq.seeds.iter().enumerate() {
        point(s, sys, &format!("equilibria.seeds[{i}]"), p)?;
    }
    positive(eq.verify_t, "equilibria.verify_t", &s.path)?;
    positive(eq.verify_dt, "equilibria.verify_dt", &s.path)?;
    let opts = EquilibriumOptions { gauge: gauge_opts(s), ..Default::default() };
    let solve = |p: &PointConfig| -> SeedResult {
        let r = equilibria::solve_equilibrium(sys, &p.q, &p.f, eq.p_magnitude, eq.eigen_index, &opts).and_then(|mut e| {
            e.verification = Some(equilibria::verify(sys, &e, eq.verify_t, eq.verify_dt)?);
            Ok(e)
        });
        match r {
            Ok(e) => SeedResult::Found(Box::new(e)),
            Err(e) => SeedResult::Failed { seed: p.clone(), error: e.to_string() },
        }
    };
    let results: Vec<SeedResult> = thread_pool()?.install(|| eq.seeds.par_iter().map(solve).collect());
    let mut numeric_failure = false;
    let mut passed = true;
    for r in &results {
        match r {
            SeedResult::Found(e) => {
                let res = &e.residuals;
                let drift = e.verification.as_ref().map_or(f64::INFINITY, |v| v.shape_drift);
                passed &= res.horizontal_p < s.tol.equilibrium
                    && res.horizontal_v < s.tol.equilibrium
                    && res.vertical < s.tol.equilibrium
                    && drift < 1e-6;
            }
            SeedResult::Failed { .. } => numeric_failure = true,
        }
    }
    let report = json!({ "system": sys.name(), "p_magnitude": eq.p_magnitude, "eigen_index": eq.eigen_index, "results": results });
    let file = write_json(out, "equilibria.json", &report)?;
    if numeric_failure {
        return Err(Error::NoConvergence { iterations: opts.max_iter, residual: f64::NAN });
    }
    Ok(Outcome { passed, files: vec![file] })
}

/// Worker pool capped by `LP_REDUCE_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LP_REDUCE_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::config("LP_REDUCE_THREADS", format!("expected a positive integer, got '{v}'")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Precondition(e.to_string()))
}

fn annotated(value: &Mat<f64>, residuals: serde_json::Value) -> serde_json::Value {
    json!({ "value": value.to_rows(), "residuals": residuals })
}

fn run_derive(sys: &AnySystem, s: &Settings, out: &Path) -> Result<Outcome> {
    let p = s.cfg.point.clone().ok_or_else(|| Error::config(&s.path, "point: required for this command"))?;
    point(s, sys, "point", &p)?;
    let pt = decompose(sys, &p.q, &p.f, None, &gauge_opts(s))?;
    let gc = GeometryCache::new(sys, &pt.q_star, &pt.f_tilde)?;
    let ps = &gc.ps;
    let pr = ps.residuals();
    let gr = gc.residuals(sys.group());
    let n = gc.dim_ext();
    let christoffel: Vec<Vec<Vec<f64>>> =
        (0..n).map(|b| (0..n).map(|m| (0..n).map(|t| gc.christoffel_at(b, m, t)).collect()).collect()).collect();
    let tol = s.tol.projector;
    let passed = pr.max_algebraic() < tol && gr.max_algebraic() < tol;
    let report = json!({
        "system": sys.name(),
        "point": { "q": p.q, "f": p.f },
        "adapted": pt,
        "faddeev_popov": annotated(&ps.phi, json!({ "determinant": ps.phi.determinant() })),
        "n": annotated(&ps.n_pp, json!({ "idempotent": pr.n_idempotent, "killing": pr.n_killing, "gauge": pr.chi_n })),
        "n_ext": annotated(&ps.n_ext, json!({ "idempotent": pr.n_ext_idempotent, "killing": pr.n_ext_killing })),
        "p_perp": annotated(&ps.p_perp, json!({ "idempotent": pr.p_perp_idempotent, "n_p_perp": pr.n_p_perp, "p_perp_n": pr.p_perp_n })),
        "pi": annotated(&ps.pi, json!({ "idempotent": pr.pi_idempotent, "killing": pr.pi_killing, "n_pi": pr.n_pi, "pi_n": pr.pi_n })),
        "d": annotated(&ps.d, json!({ "symmetric": pr.d_symmetric, "inverse": pr.d_inverse, "min_eigenvalue": pr.d_min_eigenvalue })),
        "potentials": annotated(&gc.potentials, json!({ "killing_pairing": gr.killing_pairing, "horizontal_annihilation": gr.horizontal_annihilation })),
        "curvature": { "value": gc.curvature.iter().map(|m| m.to_rows()).collect::<Vec<_>>(), "residuals": { "antisymmetry": gr.curvature_antisymmetry } },
        "horizontal_metric": annotated(&gc.g_h, json!({ "kernel": gr.horizontal_metric_kernel, "definition": gr.horizontal_metric_definition, "min_eigenvalue": gr.horizontal_metric_min_eigenvalue })),
        "pseudo_inverse": annotated(&gc.g_check, json!({ "orthogonality": gr.orthogonality, "pi_contraction": gr.pi_contraction })),
        "christoffel": { "value": christoffel, "residuals": { "symmetry": gr.christoffel_symmetry } },
        "covariant_d_inverse": { "value": gc.cov_d_inv.iter().map(|m| m.to_rows()).collect::<Vec<_>>(), "residuals": { "inverse_identity": gr.inverse_derivative, "symmetry": gr.cov_d_symmetry } },
        "potential_gradient": gc.grad_v,
        "passed": passed,
    });
    let file = write_json(out, "derive-report.json", &report)?;
    Ok(Outcome { passed, files: vec![file] })
}

/// Entry point used by the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = run(&cli);
    match &result {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            if !o.passed {
                eprintln!("error: acceptance checks failed (see the report)");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    exit_code(&result)
}
