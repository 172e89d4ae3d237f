use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::cone_metric::{BaseDistance, ConeMetricSpace, MPoint};
use crate::contraction::{check_constant, ContractionKind};
use crate::error::Error;
use crate::maps::{parse_expr, parse_map_for, DomainBox, Env, MapCapabilities, Symbols};
use crate::ordered_space::{ConeKind, ConeSpec, DEFAULT_INTERIOR_MARGIN};
use crate::presets;
use crate::solver::{Problem, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// A real given either as a JSON number or as a constant expression such as `"1/3"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    pub fn value(&self) -> Result<f64, Error> {
        match self {
            Scalar::Number(v) => Ok(*v),
            Scalar::Expr(src) => parse_expr(
                src,
                Symbols {
                    point_dimension: 0,
                    allow_t: false,
                },
            )?
            .eval(&Env { point: &[], t: 0.0 }),
        }
    }
}

/// A point written as a bare number (one-dimensional) or as a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl PointSpec {
    pub fn coords(&self) -> Vec<f64> {
        match self {
            PointSpec::Scalar(v) => vec![*v],
            PointSpec::Vector(v) => v.clone(),
        }
    }
}

/// `[lo, hi]` for one dimension or `[[lo, hi], ...]` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Box(Vec<(f64, f64)>),
    Interval(f64, f64),
}

impl DomainSpec {
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        match self {
            DomainSpec::Box(v) => v.clone(),
            DomainSpec::Interval(lo, hi) => vec![(*lo, *hi)],
        }
    }
}

fn default_point_dimension() -> usize {
    1
}
fn default_margin() -> f64 {
    DEFAULT_INTERIOR_MARGIN
}
fn default_normal_constant() -> f64 {
    1.0
}
fn default_cone() -> ConeKind {
    ConeKind::Orthant
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_pairs() -> usize {
    100_000
}
fn default_axiom_samples() -> usize {
    10_000
}
fn default_injectivity_samples() -> usize {
    2_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub grid_size: usize,
    #[serde(default = "default_point_dimension")]
    pub point_dimension: usize,
    pub weight: String,
    #[serde(default)]
    pub base: BaseDistance,
    #[serde(default = "default_cone")]
    pub cone: ConeKind,
    #[serde(default = "default_margin")]
    pub interior_margin: f64,
    #[serde(default = "default_normal_constant")]
    pub normal_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapsSection {
    #[serde(rename = "T")]
    pub t: String,
    #[serde(rename = "S")]
    pub s: String,
    #[serde(default)]
    pub capabilities: MapCapabilities,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionSection {
    pub kind: ContractionKind,
    pub constant: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub x0: PointSpec,
    pub domain: DomainSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub starts: Vec<PointSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_axiom_samples")]
    pub axiom_samples: usize,
    #[serde(default = "default_injectivity_samples")]
    pub injectivity_samples: usize,
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            pairs: default_pairs(),
            axiom_samples: default_axiom_samples(),
            injectivity_samples: default_injectivity_samples(),
        }
    }
}

/// On-disk problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub space: SpaceSection,
    pub maps: MapsSection,
    pub contraction: ContractionSection,
    pub solve: SolveSection,
    #[serde(default)]
    pub sampling: SamplingSection,
}

/// A validated problem file with every expression parsed.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub file: ProblemFile,
    pub problem: Problem,
    pub starts: Vec<MPoint>,
    pub tol: f64,
    pub max_iter: usize,
    pub sampling: SamplingSection,
}

fn field(name: &str) -> impl Fn(Error) -> HarnessError + '_ {
    move |e| HarnessError::Invalid {
        field: name.to_string(),
        reason: e.to_string(),
    }
}

fn reject(name: &str, reason: impl Into<String>) -> HarnessError {
    HarnessError::Invalid {
        field: name.to_string(),
        reason: reason.into(),
    }
}

impl ProblemFile {
    pub fn validate(self) -> Result<LoadedProblem, HarnessError> {
        let sp = &self.space;
        if sp.grid_size < 2 {
            return Err(reject("space.grid_size", "must be at least 2"));
        }
        let k = sp.point_dimension;
        if k == 0 {
            return Err(reject("space.point_dimension", "must be at least 1"));
        }
        let cone = ConeSpec::new(sp.grid_size, sp.cone, sp.interior_margin, sp.normal_constant)
            .map_err(field("space.cone"))?;
        let space = ConeMetricSpace::new(k, cone, &sp.weight, sp.base).map_err(field("space.weight"))?;

        let t_map = parse_map_for(&self.maps.t, k).map_err(field("maps.T"))?;
        let s_map = parse_map_for(&self.maps.s, k).map_err(field("maps.S"))?;
        let capabilities = self.maps.capabilities;
        capabilities.validate().map_err(field("maps.capabilities"))?;

        let constant = self.contraction.constant.value().map_err(field("contraction.constant"))?;
        check_constant(constant).map_err(|_| {
            reject(
                "contraction.constant",
                format!("constant out of [0, 1/2): got {constant}"),
            )
        })?;

        let point = |name: &str, spec: &PointSpec| -> Result<MPoint, HarnessError> {
            let coords = spec.coords();
            if coords.len() != k {
                return Err(reject(name, format!("expected {k} coordinates, got {}", coords.len())));
            }
            MPoint::new(coords).map_err(field(name))
        };
        let x0 = point("solve.x0", &self.solve.x0)?;
        let domain = DomainBox::new(self.solve.domain.intervals()).map_err(field("solve.domain"))?;
        if domain.dimension() != k {
            return Err(reject("solve.domain", format!("expected {k} intervals")));
        }
        if !domain.contains(x0.coords()) {
            return Err(reject("solve.x0", "initial point lies outside the domain"));
        }
        let starts = self
            .solve
            .starts
            .iter()
            .map(|s| point("solve.starts", s))
            .collect::<Result<Vec<_>, _>>()?;
        if !(self.solve.tol > 0.0 && self.solve.tol.is_finite()) {
            return Err(reject("solve.tol", "must be positive and finite"));
        }
        if self.solve.max_iter == 0 {
            return Err(reject("solve.max_iter", "must be at least 1"));
        }
        let sampling = self.sampling;
        if sampling.pairs == 0 || sampling.axiom_samples == 0 || sampling.injectivity_samples < 2 {
            return Err(reject("sampling", "sample counts must be positive (injectivity needs 2)"));
        }

        let problem = Problem {
            space,
            t_map,
            capabilities,
            s_map,
            kind: self.contraction.kind,
            constant,
            x0,
            domain,
        };
        problem.validate().map_err(field("problem"))?;
        Ok(LoadedProblem {
            tol: self.solve.tol,
            max_iter: self.solve.max_iter,
            file: self,
            problem,
            starts,
            sampling,
        })
    }
}

/// Parse and validate problem-file text.
pub fn load_problem_str(text: &str) -> Result<LoadedProblem, HarnessError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| HarnessError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.validate()
}

/// Load a problem file from disk.
pub fn load_problem(path: &Path) -> Result<LoadedProblem, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_problem_str(&text)
}

/// Resolve a CLI argument: an existing file first, then a bundled fixture name.
pub fn resolve_problem(arg: &str) -> Result<LoadedProblem, HarnessError> {
    let path = Path::new(arg);
    if path.exists() {
        return load_problem(path);
    }
    match presets::builtin(arg) {
        Some(text) => load_problem_str(text),
        None => load_problem(path),
    }
}
