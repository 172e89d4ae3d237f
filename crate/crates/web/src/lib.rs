//! Browser bindings for the `conefix` solver.
//!
//! Every export takes a JSON [`DemoInput`] and returns a JSON string, so the
//! page needs nothing beyond `JSON.parse`. The same functions are plain Rust
//! underneath and are tested natively.

use conefix::cone_metric::{ConeMetricSpace, MPoint};
use conefix::contraction::{check_condition, estimate_min_constant, ConstantEstimate, ContractionKind, PairEvaluator};
use conefix::maps::{parse_map, DomainBox, MapCapabilities};
use conefix::solver::{solve, Problem};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// A one-dimensional problem on `[lo, hi]` with `d(x, y) = |x - y| e^t`.
#[derive(Debug, Clone, Deserialize)]
pub struct DemoInput {
    #[serde(rename = "T")]
    pub t: String,
    #[serde(rename = "S")]
    pub s: String,
    pub kind: ContractionKind,
    pub constant: f64,
    pub x0: f64,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_grid() -> usize {
    33
}
fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    500
}

impl DemoInput {
    fn problem(&self) -> Result<Problem, String> {
        let err = |e: conefix::Error| e.to_string();
        let p = Problem {
            space: ConeMetricSpace::exp_weighted_line(self.grid_size).map_err(err)?,
            t_map: parse_map(&self.t).map_err(|e| format!("T: {e}"))?,
            capabilities: MapCapabilities::all(),
            s_map: parse_map(&self.s).map_err(|e| format!("S: {e}"))?,
            kind: self.kind,
            constant: self.constant,
            x0: MPoint::scalar(self.x0).map_err(err)?,
            domain: DomainBox::interval(self.lo, self.hi).map_err(err)?,
        };
        p.validate().map_err(err)?;
        Ok(p)
    }
}

fn parse_input(json: &str) -> Result<DemoInput, String> {
    serde_json::from_str(json).map_err(|e| format!("input: {e}"))
}

#[derive(Debug, Serialize)]
pub struct SolveOutput {
    pub converged: bool,
    pub u: f64,
    pub iterations: usize,
    pub residual: f64,
    pub h: f64,
    pub iterates: Vec<f64>,
    /// `‖d(Tx_n, Tx_{n+1})‖`.
    pub trace: Vec<f64>,
    /// A priori bound at each iterate, aligned with `trace`.
    pub bound: Vec<f64>,
}

/// Run the iteration and return iterates, step norms and the bound curve.
pub fn solve_demo(json: &str) -> Result<String, String> {
    let input = parse_input(json)?;
    let problem = input.problem()?;
    let r = solve(&problem, input.tol, input.max_iter).map_err(|e| e.to_string())?;
    let bound = (0..r.trace.len())
        .map(|n| r.certificate.gap_bound(n).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let out = SolveOutput {
        converged: r.converged(),
        u: r.u.coords()[0],
        iterations: r.iterations,
        residual: r.residual,
        h: r.certificate.h,
        iterates: r.iterates.iter().map(|p| p.coords()[0]).collect(),
        trace: r.trace,
        bound,
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[derive(Debug, Serialize)]
pub struct EstimateOutput {
    /// `null` when no finite constant works.
    pub estimate: Option<f64>,
    pub witness: Option<(f64, f64)>,
    pub violations: usize,
    pub pairs: usize,
}

/// Estimate the smallest admissible constant and count violations of the
/// declared one.
pub fn estimate_demo(json: &str, pairs: usize, seed: u64) -> Result<String, String> {
    let input = parse_input(json)?;
    let p = input.problem()?;
    let pairs = pairs.clamp(1, 200_000);
    let est = estimate_min_constant(&p.space, &p.t_map, &p.s_map, p.kind, pairs, &p.domain, seed)
        .map_err(|e| e.to_string())?;
    let report = check_condition(&p.space, &p.t_map, &p.s_map, p.kind, p.constant, pairs, &p.domain, seed)
        .map_err(|e| e.to_string())?;
    let (estimate, witness) = match est {
        ConstantEstimate::Finite { value } => (Some(value), None),
        ConstantEstimate::Undefined { x, y } => (None, Some((x[0], y[0]))),
    };
    let out = EstimateOutput {
        estimate,
        witness,
        violations: report.violation_count,
        pairs: report.pairs_checked,
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[derive(Debug, Serialize)]
pub struct RatioField {
    pub resolution: usize,
    pub lo: f64,
    pub hi: f64,
    /// Row-major, `values[i * resolution + j]` at `(x_j, y_i)`; `null` where
    /// no finite constant works.
    pub values: Vec<Option<f64>>,
    pub max: Option<f64>,
}

/// Per-pair minimal constant on a `resolution x resolution` grid of `[lo, hi]^2`.
pub fn ratio_field_demo(json: &str, resolution: usize) -> Result<String, String> {
    let input = parse_input(json)?;
    let p = input.problem()?;
    let n = resolution.clamp(2, 256);
    let eval = PairEvaluator::new(&p.space, &p.t_map, &p.s_map, p.kind);
    let at = |k: usize| input.lo + (input.hi - input.lo) * k as f64 / (n - 1) as f64;
    let mut values = Vec::with_capacity(n * n);
    let mut max: Option<f64> = None;
    for i in 0..n {
        let y = MPoint::scalar(at(i)).map_err(|e| e.to_string())?;
        for j in 0..n {
            let x = MPoint::scalar(at(j)).map_err(|e| e.to_string())?;
            let v = eval.sides(&x, &y).map_err(|e| e.to_string())?.min_constant();
            if let Some(v) = v {
                max = Some(max.map_or(v, |m| m.max(v)));
            }
            values.push(v);
        }
    }
    let out = RatioField {
        resolution: n,
        lo: input.lo,
        hi: input.hi,
        values,
        max,
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

#[wasm_bindgen]
pub fn solve_json(input: &str) -> Result<String, JsError> {
    solve_demo(input).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn estimate_json(input: &str, pairs: usize, seed: u32) -> Result<String, JsError> {
    estimate_demo(input, pairs, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ratio_field_json(input: &str, resolution: usize) -> Result<String, JsError> {
    ratio_field_demo(input, resolution).map_err(|e| JsError::new(&e))
}
