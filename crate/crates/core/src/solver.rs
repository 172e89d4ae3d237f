//! Picard iteration `x_{n+1} = S x_n` with geometric-series certificates.
//!
//! Under TK1 with constant `b` (or TK2 with `c`) the steps `d(Tx_n, Tx_{n+1})`
//! decay at least like `h^n` with `h = b / (1 - b)` (resp. `c / (1 - c)`), so
//! for every `m > n`
//!
//! ```text
//! ‖d(Tx_n, Tx_m)‖ <= K h^n ‖d0‖ / (1 - h)            (a priori)
//! ‖d(Tx_n, v)‖    <= K h ‖d(Tx_{n-1}, Tx_n)‖ / (1 - h) (a posteriori)
//! ```
//!
//! where `K` is the normal constant and `v` the limit of `(T x_n)`.

use serde::{Deserialize, Serialize};

use crate::cone_metric::{ConeMetricSpace, MPoint};
use crate::contraction::{check_constant, ContractionKind};
use crate::error::{invalid, Error, Result};
use crate::maps::{DomainBox, MapCapabilities, MapExpr};

/// Slack on the decay and bound-domination checks.
pub const BOUND_SLACK: f64 = 1e-9;

pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-9;

/// `h = constant / (1 - constant)`.
pub fn contraction_ratio(constant: f64) -> Result<f64> {
    check_constant(constant)?;
    Ok(constant / (1.0 - constant))
}

fn check_ratio(h: f64) -> Result<()> {
    if !(0.0..1.0).contains(&h) {
        return Err(Error::RatioOutOfRange { h });
    }
    Ok(())
}

/// `K h^n d0 / (1 - h)`: bound on `‖d(TS^n x0, TS^m x0)‖` for all `m > n`.
pub fn apriori_bound(h: f64, d0_norm: f64, normal_constant: f64, n: u64) -> Result<f64> {
    check_ratio(h)?;
    if !(d0_norm >= 0.0 && d0_norm.is_finite()) {
        return Err(invalid("d0_norm", "must be nonnegative and finite"));
    }
    if !(normal_constant > 0.0 && normal_constant.is_finite()) {
        return Err(invalid("normal_constant", "must be positive and finite"));
    }
    let power = match i32::try_from(n) {
        Ok(k) => h.powi(k),
        Err(_) => h.powf(n as f64),
    };
    Ok(normal_constant * power * d0_norm / (1.0 - h))
}

/// Smallest `n >= 0` with `apriori_bound(n) <= tol`.
pub fn iterations_needed(h: f64, d0_norm: f64, normal_constant: f64, tol: f64) -> Result<u64> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(invalid("tol", "must be positive and finite"));
    }
    let bound = |n: u64| apriori_bound(h, d0_norm, normal_constant, n);
    if bound(0)? <= tol {
        return Ok(0);
    }
    if h == 0.0 {
        return Ok(1);
    }
    let start = normal_constant * d0_norm / (1.0 - h);
    let guess = ((tol / start).ln() / h.ln()).ceil();
    let mut n = if guess.is_finite() && guess > 0.0 {
        guess.min(u64::MAX as f64 / 2.0) as u64
    } else {
        1
    };
    while n > 0 && bound(n - 1)? <= tol {
        n -= 1;
    }
    while bound(n)? > tol {
        n += 1;
    }
    Ok(n)
}

/// `trace[n] <= K h^n trace[0] + 1e-9` for every `n`.
pub fn verify_decay(trace: &[f64], h: f64, normal_constant: f64) -> bool {
    let Some(&first) = trace.first() else {
        return false;
    };
    if check_ratio(h).is_err() {
        return false;
    }
    let mut power = 1.0f64;
    for &step in trace {
        if step > normal_constant * power * first + BOUND_SLACK {
            return false;
        }
        power *= h;
    }
    true
}

/// Everything the fixed-point theorems take as hypotheses.
#[derive(Debug, Clone)]
pub struct Problem {
    pub space: ConeMetricSpace,
    pub t_map: MapExpr,
    pub capabilities: MapCapabilities,
    pub s_map: MapExpr,
    pub kind: ContractionKind,
    pub constant: f64,
    pub x0: MPoint,
    pub domain: DomainBox,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        check_constant(self.constant)?;
        self.capabilities.validate()?;
        let k = self.space.point_dimension();
        for (name, dim) in [
            ("t_map", self.t_map.dimension()),
            ("s_map", self.s_map.dimension()),
            ("x0", self.x0.dimension()),
            ("domain", self.domain.dimension()),
        ] {
            if dim != k {
                return Err(invalid(name, format!("dimension {dim} differs from point dimension {k}")));
            }
        }
        if !self.domain.contains(self.x0.coords()) {
            return Err(invalid("x0", "initial point lies outside the domain box"));
        }
        Ok(())
    }

    pub fn ratio(&self) -> Result<f64> {
        contraction_ratio(self.constant)
    }

    /// The map playing the role of `T`: the identity for K1/K2.
    pub fn effective_t(&self) -> MapExpr {
        if self.kind.ignores_t() {
            MapExpr::identity(self.space.point_dimension())
        } else {
            self.t_map.clone()
        }
    }

    pub fn with_start(&self, x0: MPoint) -> Self {
        Self { x0, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: ContractionKind,
    pub h: f64,
    pub normal_constant: f64,
    /// `‖d(Tx0, TSx0)‖` for Kannan kinds, `‖d(TSx0, TSx1)‖` for Chatterjea kinds.
    pub d0_norm: f64,
    /// Index shift between the bound curve and the iterates: entry `n` of
    /// `apriori_curve` bounds `‖d(Tx_{n+offset}, Tx_m)‖` for `m > n + offset`.
    pub offset: usize,
    /// `‖d(Tx0, Tx1)‖`, needed to bound the first iterate when `offset = 1`.
    pub first_step_norm: f64,
    pub apriori_curve: Vec<f64>,
    pub aposteriori_residual: f64,
    pub decay_verified: bool,
}

impl Certificate {
    /// Bound on `‖d(Tx_n, Tx_m)‖` for every `m > n`.
    pub fn gap_bound(&self, n: usize) -> Result<f64> {
        if n >= self.offset {
            apriori_bound(self.h, self.d0_norm, self.normal_constant, (n - self.offset) as u64)
        } else {
            Ok(self.first_step_norm
                + apriori_bound(self.h, self.d0_norm, self.normal_constant, 0)?)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
}

/// What the declared capabilities of `T` let us say about the returned point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// `T` sequentially convergent: the iterates themselves converge to `u`.
    Sequential,
    /// Only a convergent subsequence is guaranteed; `u` is the terminal iterate.
    SubsequentialOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub u: MPoint,
    /// `‖d(T S u, T u)‖`: how far `Tu` sits from the next term of `(TS^n x0)`.
    pub v_norm_gap: f64,
    /// `‖d(u, S u)‖`.
    pub residual: f64,
    pub iterations: usize,
    /// `trace[n] = ‖d(Tx_n, Tx_{n+1})‖`.
    pub trace: Vec<f64>,
    /// `x_0, x_1, ..., x_iterations`.
    pub iterates: Vec<MPoint>,
    pub certificate: Certificate,
    pub termination: Termination,
    pub limit_kind: LimitKind,
    pub missing_hypotheses: Vec<String>,
    pub unique_probe: Option<bool>,
}

impl FixedPointResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Run the Picard iteration from `problem.x0`.
///
/// Stops at the first iterate `u = x_n` whose a posteriori bound
/// `K h ‖d(Tx_{n-1}, Tx_n)‖ / (1 - h)` and residual `‖d(u, S u)‖` are both
/// at most `tol`. The residual is taken in `M` because the certificate only
/// controls `T`-images, which can be much smaller than distances in `M`
/// (e.g. `T x = x^2` near zero).
pub fn solve(problem: &Problem, tol: f64, max_iter: usize) -> Result<FixedPointResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(invalid("tol", "must be positive and finite"));
    }
    if max_iter == 0 {
        return Err(invalid("max_iter", "must be at least 1"));
    }
    problem.validate()?;
    let h = problem.ratio()?;
    check_ratio(h)?;
    let space = &problem.space;
    let k = space.normal_constant();
    let t_map = problem.effective_t();
    let s_map = &problem.s_map;
    let dist = |a: &MPoint, b: &MPoint| space.distance_norm(a, b);

    let mut x = problem.x0.clone();
    let mut tx = t_map.eval(&x)?;
    let mut next = s_map.eval(&x)?;
    let first_step_norm = dist(&tx, &t_map.eval(&next)?)?;
    let (d0_norm, offset) = if problem.kind.is_kannan() {
        (first_step_norm, 0)
    } else {
        let after = s_map.eval(&next)?;
        (dist(&t_map.eval(&next)?, &t_map.eval(&after)?)?, 1)
    };

    let mut trace = Vec::new();
    let mut iterates = vec![x.clone()];
    let mut termination = Termination::MaxIterations;
    let mut residual = f64::INFINITY;
    let mut aposteriori = f64::INFINITY;
    let mut lookahead_t = tx.clone();
    for _ in 0..max_iter {
        let x_next = next;
        let t_next = t_map.eval(&x_next)?;
        let step = dist(&tx, &t_next)?;
        trace.push(step);
        iterates.push(x_next.clone());
        let lookahead = s_map.eval(&x_next)?;
        residual = dist(&x_next, &lookahead)?;
        aposteriori = k * h * step / (1.0 - h);
        x = x_next;
        tx = t_next;
        next = lookahead;
        if aposteriori <= tol && residual <= tol {
            termination = Termination::Converged;
            lookahead_t = t_map.eval(&next)?;
            break;
        }
    }
    if termination == Termination::MaxIterations {
        lookahead_t = t_map.eval(&next)?;
    }
    let v_norm_gap = dist(&lookahead_t, &tx)?;

    let iterations = trace.len();
    let apriori_curve = (0..=iterations as u64)
        .map(|n| apriori_bound(h, d0_norm, k, n))
        .collect::<Result<Vec<_>>>()?;
    let decay_verified = trace.len() <= offset || verify_decay(&trace[offset..], h, k);
    let limit_kind = if problem.kind.ignores_t() || problem.capabilities.sequentially_convergent {
        LimitKind::Sequential
    } else {
        LimitKind::SubsequentialOnly
    };
    let missing_hypotheses = if problem.kind.ignores_t() {
        Vec::new()
    } else {
        problem
            .capabilities
            .missing_hypotheses()
            .into_iter()
            .map(String::from)
            .collect()
    };
    Ok(FixedPointResult {
        u: x,
        v_norm_gap,
        residual,
        iterations,
        trace,
        iterates,
        certificate: Certificate {
            kind: problem.kind,
            h,
            normal_constant: k,
            d0_norm,
            offset,
            first_step_norm,
            apriori_curve,
            aposteriori_residual: aposteriori,
            decay_verified,
        },
        termination,
        limit_kind,
        missing_hypotheses,
        unique_probe: None,
    })
}

/// Per-start outcome of a uniqueness probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRun {
    pub start: MPoint,
    pub limit: Option<MPoint>,
    pub iterations: usize,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub agree: bool,
    pub tolerance: f64,
    /// Largest `‖d(Tu_i, Tu_j)‖`, the quantity the certificates control.
    pub max_pair_gap: f64,
    /// Largest `‖d(u_i, u_j)‖`, informational.
    pub max_point_gap: f64,
    pub runs: Vec<ProbeRun>,
}

/// Solve from each start and require all limits to agree within `2 K tol`.
///
/// Agreement is judged on the images `T u_i`: each run certifies
/// `‖d(Tu_i, v_i)‖ <= K tol`, and `T` is injective, so images within `2 K tol`
/// of each other are the numerical form of `u_i = u_j`.
///
/// A start whose iteration fails to evaluate or does not converge counts as
/// disagreement; problem-level errors (bad constant, bad dimensions) are
/// returned as errors.
pub fn uniqueness_probe(problem: &Problem, starts: &[MPoint], tol: f64, max_iter: usize) -> Result<UniquenessReport> {
    if starts.len() < 2 {
        return Err(invalid("starts", "need at least two starts"));
    }
    problem.ratio()?;
    let k = problem.space.normal_constant();
    let mut runs = Vec::with_capacity(starts.len());
    for start in starts {
        let candidate = Problem {
            domain: DomainBox::new(
                problem
                    .domain
                    .intervals()
                    .iter()
                    .zip(start.coords())
                    .map(|(&(lo, hi), &s)| (lo.min(s), hi.max(s)))
                    .collect(),
            )?,
            ..problem.with_start(start.clone())
        };
        candidate.validate()?;
        let run = match solve(&candidate, tol, max_iter) {
            Ok(r) if r.converged() => ProbeRun {
                start: start.clone(),
                limit: Some(r.u),
                iterations: r.iterations,
                failure: None,
            },
            Ok(r) => ProbeRun {
                start: start.clone(),
                limit: None,
                iterations: r.iterations,
                failure: Some(format!("no convergence within {max_iter} iterations")),
            },
            Err(e) => ProbeRun {
                start: start.clone(),
                limit: None,
                iterations: 0,
                failure: Some(e.to_string()),
            },
        };
        runs.push(run);
    }
    let tolerance = 2.0 * k * tol;
    let t_map = problem.effective_t();
    let mut max_pair_gap = 0.0f64;
    let mut max_point_gap = 0.0f64;
    let mut agree = runs.iter().all(|r| r.limit.is_some());
    let limits: Vec<&MPoint> = runs.iter().filter_map(|r| r.limit.as_ref()).collect();
    let images = limits.iter().map(|u| t_map.eval(u)).collect::<Result<Vec<_>>>()?;
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            let gap = problem.space.distance_norm(&images[i], &images[j])?;
            max_pair_gap = max_pair_gap.max(gap);
            max_point_gap = max_point_gap.max(problem.space.distance_norm(limits[i], limits[j])?);
            if gap > tolerance {
                agree = false;
            }
        }
    }
    Ok(UniquenessReport {
        agree,
        tolerance,
        max_pair_gap,
        max_point_gap,
        runs,
    })
}
