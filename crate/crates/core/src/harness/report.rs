use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EXIT_FAILURES, EXIT_OK};
use crate::contraction::{ConstantEstimate, ContractionKind, ContractionReport};
use crate::maps::InjectivityReport;
use crate::ordered_space::{AxiomReport, NormalityReport};
use crate::solver::{FixedPointResult, UniquenessReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub kind: ContractionKind,
    pub pairs: usize,
    pub estimate: ConstantEstimate,
    /// The estimate is finite and below 1/2.
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub result: FixedPointResult,
    pub uniqueness: Option<UniquenessReport>,
    /// Iterations the a priori bound asks for to reach the tolerance.
    pub predicted_iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub cone: AxiomReport,
    pub normality: NormalityReport,
    pub metric: AxiomReport,
    /// Present only when `T` is declared injective.
    pub injectivity: Option<InjectivityReport>,
    pub weight_admissible: bool,
}

/// Everything one subcommand produced. Sections not run are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub command: String,
    pub seed: u64,
    pub contraction: Option<ContractionReport>,
    pub estimate: Option<EstimateReport>,
    pub solve: Option<SolveReport>,
    pub verification: Option<VerificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl RunReport {
    pub fn exit_status(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_FAILURES
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Short human-readable digest for stderr.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} (seed {})", self.command, self.problem, self.seed);
        if let Some(c) = &self.contraction {
            let _ = writeln!(
                out,
                "  check     {} b={}: {} violations in {} pairs",
                c.kind, c.constant, c.violation_count, c.pairs_checked
            );
        }
        if let Some(e) = &self.estimate {
            let value = match &e.estimate {
                ConstantEstimate::Finite { value } => format!("{value:.6}"),
                ConstantEstimate::Undefined { .. } => "undefined".into(),
            };
            let _ = writeln!(out, "  estimate  {} min constant {}", e.kind, value);
        }
        if let Some(s) = &self.solve {
            let r = &s.result;
            let _ = writeln!(
                out,
                "  solve     u={:?} after {} iterations (predicted {}), residual {:.3e}",
                r.u.coords(),
                r.iterations,
                s.predicted_iterations,
                r.residual
            );
            if !r.missing_hypotheses.is_empty() {
                let _ = writeln!(out, "            missing hypotheses: {}", r.missing_hypotheses.join(", "));
            }
            if let Some(u) = &s.uniqueness {
                let _ = writeln!(out, "            uniqueness probe over {} starts: {}", u.runs.len(), u.agree);
            }
        }
        if let Some(v) = &self.verification {
            let _ = writeln!(
                out,
                "  verify    cone {} normality {} metric {} weight {}",
                v.cone.passed(),
                v.normality.pass,
                v.metric.passed(),
                v.weight_admissible
            );
        }
        for f in &self.failures {
            let _ = writeln!(out, "  FAIL {f}");
        }
        let _ = write!(out, "{}", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}
