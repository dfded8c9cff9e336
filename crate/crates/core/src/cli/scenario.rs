use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fedosov::ConnectionData;
use crate::index::Frame;
use crate::poisson::Polyvector;
use crate::weyl::model::{ModelConfig, ModelKind};
use crate::weyl::rational::{self, Rational};
use crate::weyl::{parse_series, FormalSeries};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub kind: String,
    pub dim: usize,
    #[serde(default)]
    pub base_cutoff: Option<u32>,
    pub fiber_max: u32,
    pub hbar_max: u32,
    #[serde(default)]
    pub t_max: u32,
    #[serde(default = "one")]
    pub matrix_size: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConnectionBlock {
    /// `christoffel[k][i][j]`, zero-based.
    pub christoffel: Vec<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StarBlock {
    #[serde(default = "moyal")]
    pub kind: String,
    #[serde(default)]
    pub pi: Option<Vec<Vec<String>>>,
}

fn moyal() -> String {
    "moyal".into()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PoissonBlock {
    pub pi: Vec<Vec<String>>,
}

/// `g = (I + upper·e_1N)(I + lower·e_N1)`, projector `g diag(I_rank, 0) g⁻¹`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IdempotentBlock {
    pub upper: String,
    pub lower: String,
    #[serde(default = "one")]
    pub rank: usize,
    /// Expected index as a `"p/q"` string.
    #[serde(default)]
    pub expected_index: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub model: ModelBlock,
    #[serde(default)]
    pub connection: Option<ConnectionBlock>,
    #[serde(default)]
    pub star: Option<StarBlock>,
    #[serde(default)]
    pub poisson: Option<PoissonBlock>,
    /// Named series, referenced elsewhere as `$name`.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    #[serde(default)]
    pub idempotents: Vec<IdempotentBlock>,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Run the chain-level homotopy in the index suite.
    #[serde(default = "yes")]
    pub homotopy: bool,
}

fn default_samples() -> usize {
    12
}

fn yes() -> bool {
    true
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug)]
pub struct ResolvedIdempotent {
    pub frame: Frame,
    pub rank: usize,
    pub q: crate::weyl::MatrixSeries,
    pub expected_index: Option<Rational>,
}

/// A scenario with every expression parsed and every invariant checked.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub scenario: Scenario,
    pub model: ModelConfig,
    pub connection: ConnectionData,
    pub star_pi: Polyvector,
    pub poisson_pi: Polyvector,
    pub idempotents: Vec<ResolvedIdempotent>,
}

fn context<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column,
            message: format!("in {what}: {message}"),
        },
        other => Error::Precondition(format!("{what}: {other}")),
    })
}

impl Resolved {
    /// The star product's bivector re-read on another model of the same kind.
    pub fn star_pi_on(&self, model: ModelConfig) -> Result<Polyvector> {
        let sc = &self.scenario;
        match sc.star.as_ref().and_then(|s| s.pi.as_ref()) {
            None => Ok(Polyvector::standard(model)),
            Some(g) => Polyvector::parse_bivector(model, &sc.strings(g)?),
        }
    }
}

impl Scenario {
    pub fn model_config(&self) -> Result<ModelConfig> {
        let b = &self.model;
        let kind = match b.kind.as_str() {
            "plane" | "affine_plane" => ModelKind::AffinePlane,
            "torus" => ModelKind::Torus,
            other => {
                return Err(Error::Unknown {
                    kind: "model kind",
                    name: other.into(),
                })
            }
        };
        let default_cutoff = if kind == ModelKind::Torus { 3 } else { 6 };
        ModelConfig::new(
            kind,
            b.dim,
            b.base_cutoff.unwrap_or(default_cutoff),
            b.fiber_max,
            b.hbar_max,
            b.t_max,
            b.matrix_size,
        )
    }

    /// An expression, or `$name` for a named input.
    fn expression<'a>(&'a self, src: &'a str) -> Result<&'a str> {
        match src.trim().strip_prefix('$') {
            Some(name) => self.inputs.get(name).map(|s| s.as_str()).ok_or_else(|| Error::Unknown {
                kind: "input",
                name: name.into(),
            }),
            None => Ok(src),
        }
    }

    fn series(&self, model: &ModelConfig, what: &str, src: &str) -> Result<FormalSeries> {
        let text = context(what, self.expression(src))?;
        context(what, parse_series(model, text))
    }

    fn strings(&self, grid: &[Vec<String>]) -> Result<Vec<Vec<String>>> {
        grid.iter()
            .map(|r| r.iter().map(|s| self.expression(s).map(str::to_owned)).collect())
            .collect()
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let model = context("model", self.model_config())?;
        for s in &self.suites {
            if !super::SUITES.contains(&s.as_str()) {
                return Err(Error::Unknown {
                    kind: "suite",
                    name: s.clone(),
                });
            }
        }
        for (name, src) in &self.inputs {
            context(&format!("inputs.{name}"), parse_series(&model, src))?;
        }
        let connection = match &self.connection {
            None => ConnectionData::flat(model),
            Some(c) => {
                let exprs: Vec<Vec<Vec<String>>> =
                    context("connection", c.christoffel.iter().map(|g| self.strings(g)).collect())?;
                context("connection", ConnectionData::parse(model, &exprs))?
            }
        };
        let bivector = |what: &str, pi: Option<&Vec<Vec<String>>>| -> Result<Polyvector> {
            match pi {
                None => Ok(Polyvector::standard(model)),
                Some(g) => {
                    let g = context(what, self.strings(g))?;
                    context(what, Polyvector::parse_bivector(model, &g))
                }
            }
        };
        if let Some(s) = &self.star {
            if s.kind != "moyal" {
                return Err(Error::Unknown {
                    kind: "star product",
                    name: s.kind.clone(),
                });
            }
        }
        let star_pi = bivector("star.pi", self.star.as_ref().and_then(|s| s.pi.as_ref()))?;
        let poisson_pi = match &self.poisson {
            Some(p) => bivector("poisson.pi", Some(&p.pi))?,
            None => star_pi.clone(),
        };

        let mut idempotents = Vec::new();
        for (k, b) in self.idempotents.iter().enumerate() {
            let what = format!("idempotents[{k}]");
            let upper = self.series(&model, &what, &b.upper)?;
            let lower = self.series(&model, &what, &b.lower)?;
            let frame = context(&what, Frame::elementary(&upper, &lower, model.matrix_size))?;
            let q = context(&what, frame.projector(b.rank))?;
            let expected_index = match &b.expected_index {
                Some(s) => Some(context(&what, rational::parse(s))?),
                None => None,
            };
            idempotents.push(ResolvedIdempotent {
                frame,
                rank: b.rank,
                q,
                expected_index,
            });
        }

        let wants = |s: &str| self.suites.iter().any(|x| x == s);
        if wants("star") && model.t_max > 0 && model.t_max < 2 * model.hbar_max + 1 {
            return Err(Error::Precondition(format!(
                "idempotent paths need t_max ≥ 2·hbar_max + 1, found t_max = {}, hbar_max = {}",
                model.t_max, model.hbar_max
            )));
        }
        if wants("index") && !connection.is_flat() {
            return Err(Error::Precondition("the index suite needs a flat connection".into()));
        }
        Ok(Resolved {
            scenario: self.clone(),
            model,
            connection,
            star_pi,
            poisson_pi,
            idempotents,
        })
    }
}
