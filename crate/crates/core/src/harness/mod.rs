//! Problem files, run reports, and the subcommand dispatch behind the
//! `conefix` binary.
//!
//! Problem files are JSON with `space`, `maps`, `contraction`, `solve` and
//! optional `sampling` sections; map expressions are strings in the grammar
//! of [`crate::maps`]. Reports are JSON with a fixed field order, and are
//! byte-identical for identical input and seed unless timings are requested.

mod problem;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

pub use problem::{
    load_problem, load_problem_str, resolve_problem, ContractionSection, DomainSpec, LoadedProblem, MapsSection,
    PointSpec, ProblemFile, SamplingSection, Scalar, SolveSection, SpaceSection,
};
pub use report::{EstimateReport, RunReport, SolveReport, VerificationReport};

use crate::cone_metric::verify_metric_axioms;
use crate::contraction::{check_condition, estimate_min_constant, ConstantEstimate};
use crate::error::Error;
use crate::maps::spot_check_injective;
use crate::ordered_space::{verify_cone_axioms, verify_normality};
use crate::solver::{iterations_needed, solve, uniqueness_probe};

pub const DEFAULT_SEED: u64 = 42;

/// Exit statuses of the binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error(transparent)]
    Compute(#[from] Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Estimate,
    Solve,
    Verify,
    All,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::Check,
        Command::Estimate,
        Command::Solve,
        Command::Verify,
        Command::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Estimate => "estimate",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::All => "all",
        }
    }

    fn includes(self, other: Command) -> bool {
        self == other || self == Command::All
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Record wall-clock timings in the report (makes it nondeterministic).
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            tol: None,
            max_iter: None,
            timings: false,
        }
    }
}

/// Run one subcommand against a loaded problem.
pub fn run(loaded: &LoadedProblem, command: Command, options: &RunOptions) -> Result<RunReport, HarnessError> {
    let problem = &loaded.problem;
    let seed = options.seed;
    let tol = options.tol.unwrap_or(loaded.tol);
    let max_iter = options.max_iter.unwrap_or(loaded.max_iter);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(HarnessError::Invalid {
            field: "--tol".into(),
            reason: "must be positive and finite".into(),
        });
    }
    if max_iter == 0 {
        return Err(HarnessError::Invalid {
            field: "--max-iter".into(),
            reason: "must be at least 1".into(),
        });
    }
    let pairs = loaded.sampling.pairs;
    let mut timings = BTreeMap::new();
    let mut failures = Vec::new();
    let mut clock = |name: &str, start: Instant| {
        timings.insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3);
    };

    let mut report = RunReport {
        problem: loaded.file.name.clone(),
        command: command.name().to_string(),
        seed,
        contraction: None,
        estimate: None,
        solve: None,
        verification: None,
        timings_ms: None,
        failures: Vec::new(),
        passed: false,
    };

    if command.includes(Command::Check) {
        let start = Instant::now();
        let r = check_condition(
            &problem.space,
            &problem.t_map,
            &problem.s_map,
            problem.kind,
            problem.constant,
            pairs,
            &problem.domain,
            seed,
        )?;
        clock("check", start);
        if !r.is_clean() {
            failures.push(format!(
                "contraction: {} of {} pairs violate {} with constant {}",
                r.violation_count, r.pairs_checked, r.kind, r.constant
            ));
        }
        report.contraction = Some(r);
    }

    if command.includes(Command::Estimate) {
        let start = Instant::now();
        let estimate = estimate_min_constant(
            &problem.space,
            &problem.t_map,
            &problem.s_map,
            problem.kind,
            pairs,
            &problem.domain,
            seed,
        )?;
        clock("estimate", start);
        let admissible = matches!(estimate, ConstantEstimate::Finite { value } if value < 0.5);
        if !admissible {
            failures.push(match &estimate {
                ConstantEstimate::Finite { value } => {
                    format!("estimate: smallest constant {value} is not below 1/2")
                }
                ConstantEstimate::Undefined { x, y } => {
                    format!("estimate: no finite constant works (pair {x:?}, {y:?})")
                }
            });
        }
        report.estimate = Some(EstimateReport {
            kind: problem.kind,
            pairs,
            estimate,
            admissible,
        });
    }

    if command.includes(Command::Solve) {
        let start = Instant::now();
        let mut result = solve(problem, tol, max_iter)?;
        let mut starts = vec![problem.x0.clone()];
        starts.extend(loaded.starts.iter().cloned());
        let uniqueness = if starts.len() >= 2 {
            let u = uniqueness_probe(problem, &starts, tol, max_iter)?;
            result.unique_probe = Some(u.agree);
            Some(u)
        } else {
            None
        };
        let cert = &result.certificate;
        let predicted_iterations = iterations_needed(cert.h, cert.d0_norm, cert.normal_constant, tol)?;
        clock("solve", start);
        if !result.converged() {
            failures.push(format!("solve: no convergence within {max_iter} iterations"));
        }
        if !result.certificate.decay_verified {
            failures.push("solve: step norms do not decay geometrically with ratio h".into());
        }
        if let Some(u) = &uniqueness {
            if !u.agree {
                failures.push("solve: uniqueness probe found disagreeing or failed runs".into());
            }
        }
        report.solve = Some(SolveReport {
            result,
            uniqueness,
            predicted_iterations,
        });
    }

    if command.includes(Command::Verify) {
        let start = Instant::now();
        let samples = loaded.sampling.axiom_samples;
        let cone = problem.space.cone();
        let cone_axioms = verify_cone_axioms(cone, samples, seed)?;
        let normality = verify_normality(cone, samples, seed.wrapping_add(1))?;
        let metric = verify_metric_axioms(&problem.space, samples, seed.wrapping_add(2))?;
        let injectivity = if problem.capabilities.injective && !problem.kind.ignores_t() {
            Some(spot_check_injective(
                &problem.t_map,
                loaded.sampling.injectivity_samples,
                &problem.domain,
                seed.wrapping_add(3),
            )?)
        } else {
            None
        };
        clock("verify", start);
        for suite in [&cone_axioms, &metric] {
            for o in suite.outcomes.iter().filter(|o| !o.passed()) {
                failures.push(format!("verify: {} axiom {} failed on {} of {} samples", suite.suite, o.axiom, o.failures, o.checked));
            }
        }
        if !normality.pass {
            failures.push(format!(
                "verify: observed normal constant {} exceeds declared {}",
                normality.observed, normality.declared
            ));
        }
        let weight_admissible = problem.space.weight_is_admissible();
        if !weight_admissible {
            failures.push("verify: weight drops below the cone's interior margin".into());
        }
        if let Some(inj) = &injectivity {
            if let Some((x, y)) = &inj.collision {
                failures.push(format!("verify: T declared injective but T({x:?}) = T({y:?})"));
            }
        }
        report.verification = Some(VerificationReport {
            cone: cone_axioms,
            normality,
            metric,
            injectivity,
            weight_admissible,
        });
    }

    if options.timings {
        report.timings_ms = Some(timings);
    }
    report.passed = failures.is_empty();
    report.failures = failures;
    Ok(report)
}
