//! JSON system definitions: either a built-in by name or an inline,
//! expression-defined system.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_group::LieGroup;
use crate::linalg::Mat;
use crate::sampling::SampleBox;
use crate::scalar::Scalar;

use super::expr::{Env, Expr};
use super::{killing_p_from_action, MechanicalSystem, So3Warped};

pub const BUILTINS: &[&str] = &["so3-warped"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Named(String),
    Table {
        name: String,
        dim: usize,
        structure_constants: Vec<f64>,
        realization: Vec<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chart_radius: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RepresentationSpec {
    /// `"adjoint"`.
    Named(String),
    /// Explicit generators `J̄_α`.
    Generators(Vec<Vec<Vec<f64>>>),
}

/// A system as written in a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_v: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_p: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_v: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub killing_p: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<RepresentationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_box: Option<SampleBox>,
}

/// Any system the CLI can load.
#[derive(Clone, Debug)]
pub enum AnySystem {
    So3Warped(So3Warped),
    Expr(Box<ExprSystem>),
}

#[derive(Clone, Debug)]
pub struct ExprSystem {
    name: String,
    group: LieGroup,
    dim_p: usize,
    dim_v: usize,
    metric_p: Vec<Vec<Expr>>,
    metric_v: Mat<f64>,
    action: Vec<Expr>,
    killing_p: Option<Vec<Vec<Expr>>>,
    generators: Vec<Mat<f64>>,
    potential: Expr,
    gauge: Vec<Expr>,
    sample_box: SampleBox,
}

fn field<'a, T>(value: &'a Option<T>, name: &str, path: &Path) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| Error::config(path, format!("system.{name} is required")))
}

fn matrix(rows: &[Vec<f64>], n: usize, name: &str, path: &Path) -> Result<Mat<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::config(path, format!("{name} must be a {n}x{n} matrix")));
    }
    Ok(Mat::from_rows(rows))
}

fn parse_at(src: &str, at: &str, path: &Path, dims: (usize, usize, usize)) -> Result<Expr> {
    let e = Expr::parse(src).map_err(|e| Error::config(path, format!("{at}: {e}")))?;
    e.check_bounds(dims.0, dims.1, dims.2).map_err(|e| Error::config(path, format!("{at}: {e}")))?;
    Ok(e)
}

impl GroupSpec {
    pub fn build(&self, path: &Path) -> Result<LieGroup> {
        match self {
            GroupSpec::Named(n) => LieGroup::by_name(n)
                .ok_or_else(|| Error::config(path, format!("system.group: unknown group '{n}'"))),
            GroupSpec::Table { name, dim, structure_constants, realization, chart_radius } => {
                let mats = realization
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let size = m.len();
                        matrix(m, size, &format!("system.group.realization[{i}]"), path)
                    })
                    .collect::<Result<Vec<_>>>()?;
                LieGroup::from_table(
                    name,
                    *dim,
                    structure_constants.clone(),
                    mats,
                    chart_radius.unwrap_or(0.9 * std::f64::consts::PI),
                )
                .map_err(|e| Error::config(path, format!("system.group: {e}")))
            }
        }
    }
}

impl SystemSpec {
    pub fn builtin(name: &str) -> Self {
        SystemSpec { builtin: Some(name.to_string()), ..Default::default() }
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(path, format!("system: {e}")))
    }

    /// Instantiate the system, reporting the offending field on failure.
    pub fn build(&self, path: &Path) -> Result<AnySystem> {
        if let Some(b) = &self.builtin {
            return match b.as_str() {
                "so3-warped" => Ok(AnySystem::So3Warped(So3Warped::new())),
                other => Err(Error::config(
                    path,
                    format!("system.builtin: unknown system '{other}' (known: {})", BUILTINS.join(", ")),
                )),
            };
        }
        let group = field(&self.group, "group", path)?.build(path)?;
        let ng = group.dim();
        let np = *field(&self.dim_p, "dim_p", path)?;
        let nv = *field(&self.dim_v, "dim_v", path)?;
        let dims_q = (np, 0, 0);
        let dims_qa = (np, 0, ng);
        let dims_qf = (np, nv, 0);

        let metric_src = field(&self.metric_p, "metric_p", path)?;
        if metric_src.len() != np || metric_src.iter().any(|r| r.len() != np) {
            return Err(Error::config(path, format!("system.metric_p must be {np}x{np}")));
        }
        let metric_p = metric_src
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| parse_at(s, &format!("system.metric_p[{i}][{j}]"), path, dims_q))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let metric_v = matrix(field(&self.metric_v, "metric_v", path)?, nv, "system.metric_v", path)?;

        let action_src = field(&self.action, "action", path)?;
        if action_src.len() != np {
            return Err(Error::config(path, format!("system.action must have {np} components")));
        }
        let action = action_src
            .iter()
            .enumerate()
            .map(|(i, s)| parse_at(s, &format!("system.action[{i}]"), path, dims_qa))
            .collect::<Result<Vec<_>>>()?;

        let killing_p = match &self.killing_p {
            None => None,
            Some(rows) => {
                if rows.len() != np || rows.iter().any(|r| r.len() != ng) {
                    return Err(Error::config(path, format!("system.killing_p must be {np}x{ng}")));
                }
                Some(
                    rows.iter()
                        .enumerate()
                        .map(|(i, row)| {
                            row.iter()
                                .enumerate()
                                .map(|(j, s)| parse_at(s, &format!("system.killing_p[{i}][{j}]"), path, dims_q))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        };

        let generators = match field(&self.representation, "representation", path)? {
            RepresentationSpec::Named(n) if n == "adjoint" => {
                if nv != ng {
                    return Err(Error::config(
                        path,
                        format!("system.representation: adjoint needs dim_v = {ng}"),
                    ));
                }
                (0..ng)
                    .map(|alpha| {
                        let mut e = vec![0.0; ng];
                        e[alpha] = 1.0;
                        -&group.ad(&e)
                    })
                    .collect()
            }
            RepresentationSpec::Named(n) => {
                return Err(Error::config(path, format!("system.representation: unknown '{n}'")))
            }
            RepresentationSpec::Generators(g) => {
                if g.len() != ng {
                    return Err(Error::config(
                        path,
                        format!("system.representation must list {ng} generators"),
                    ));
                }
                g.iter()
                    .enumerate()
                    .map(|(i, m)| matrix(m, nv, &format!("system.representation[{i}]"), path))
                    .collect::<Result<Vec<_>>>()?
            }
        };

        let potential = parse_at(field(&self.potential, "potential", path)?, "system.potential", path, dims_qf)?;

        let gauge_src = field(&self.gauge, "gauge", path)?;
        if gauge_src.len() != ng {
            return Err(Error::config(path, format!("system.gauge must have {ng} components")));
        }
        let gauge = gauge_src
            .iter()
            .enumerate()
            .map(|(i, s)| parse_at(s, &format!("system.gauge[{i}]"), path, dims_q))
            .collect::<Result<Vec<_>>>()?;

        let sample_box = field(&self.sample_box, "sample_box", path)?.clone();
        if sample_box.q.len() != np || sample_box.f.len() != nv {
            return Err(Error::config(
                path,
                format!("system.sample_box needs {np} q-intervals and {nv} f-intervals"),
            ));
        }

        Ok(AnySystem::Expr(Box::new(ExprSystem {
            name: self.name.clone().unwrap_or_else(|| "inline".to_string()),
            group,
            dim_p: np,
            dim_v: nv,
            metric_p,
            metric_v,
            action,
            killing_p,
            generators,
            potential,
            gauge,
            sample_box,
        })))
    }
}

impl MechanicalSystem for ExprSystem {
    fn name(&self) -> &str {
        &self.name
    }

    fn group(&self) -> &LieGroup {
        &self.group
    }

    fn dim_p(&self) -> usize {
        self.dim_p
    }

    fn dim_v(&self) -> usize {
        self.dim_v
    }

    fn metric_v(&self) -> &Mat<f64> {
        &self.metric_v
    }

    fn rep_generators(&self) -> &[Mat<f64>] {
        &self.generators
    }

    fn sample_box(&self) -> &SampleBox {
        &self.sample_box
    }

    fn metric_p<T: Scalar>(&self, q: &[T]) -> Mat<T> {
        let env = Env { q, f: &[], a: &[] };
        Mat::from_fn(self.dim_p, self.dim_p, |i, j| self.metric_p[i][j].eval(&env))
    }

    fn action<T: Scalar>(&self, q: &[T], a: &[T]) -> Result<Vec<T>> {
        self.group.check_chart(a)?;
        let env = Env { q, f: &[], a };
        Ok(self.action.iter().map(|e| e.eval(&env)).collect())
    }

    fn potential<T: Scalar>(&self, q: &[T], f: &[T]) -> T {
        self.potential.eval(&Env { q, f, a: &[] })
    }

    fn gauge<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        let env = Env { q, f: &[], a: &[] };
        self.gauge.iter().map(|e| e.eval(&env)).collect()
    }

    fn killing_p<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>> {
        match &self.killing_p {
            Some(rows) => {
                let env = Env { q, f: &[], a: &[] };
                Ok(Mat::from_fn(self.dim_p, self.group.dim(), |i, j| rows[i][j].eval(&env)))
            }
            None => killing_p_from_action(self, q),
        }
    }
}

macro_rules! delegate {
    ($self:ident, $s:ident => $e:expr) => {
        match $self {
            AnySystem::So3Warped($s) => $e,
            AnySystem::Expr($s) => $e,
        }
    };
}

impl MechanicalSystem for AnySystem {
    fn name(&self) -> &str {
        delegate!(self, s => s.name())
    }
    fn group(&self) -> &LieGroup {
        delegate!(self, s => s.group())
    }
    fn dim_p(&self) -> usize {
        delegate!(self, s => s.dim_p())
    }
    fn dim_v(&self) -> usize {
        delegate!(self, s => s.dim_v())
    }
    fn metric_v(&self) -> &Mat<f64> {
        delegate!(self, s => s.metric_v())
    }
    fn rep_generators(&self) -> &[Mat<f64>] {
        delegate!(self, s => s.rep_generators())
    }
    fn sample_box(&self) -> &SampleBox {
        delegate!(self, s => s.sample_box())
    }
    fn metric_p<T: Scalar>(&self, q: &[T]) -> Mat<T> {
        delegate!(self, s => s.metric_p(q))
    }
    fn action<T: Scalar>(&self, q: &[T], a: &[T]) -> Result<Vec<T>> {
        delegate!(self, s => s.action(q, a))
    }
    fn potential<T: Scalar>(&self, q: &[T], f: &[T]) -> T {
        delegate!(self, s => s.potential(q, f))
    }
    fn gauge<T: Scalar>(&self, q: &[T]) -> Vec<T> {
        delegate!(self, s => s.gauge(q))
    }
    fn killing_p<T: Scalar>(&self, q: &[T]) -> Result<Mat<T>> {
        delegate!(self, s => s.killing_p(q))
    }
}
