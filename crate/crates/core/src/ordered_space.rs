//! The ordered Banach space `E` at a fixed finite discretization, the cone
//! `P` inside it, the induced partial order, and normality.
//!
//! `E` is `R^m` with the sup norm. On a function space such as `C[0,1]` the
//! coordinates are samples on the uniform grid `t_i = i / (m - 1)`; the sup
//! norm and the pointwise order are both preserved by that sampling.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sampling;

/// Default strict-interior margin.
pub const DEFAULT_INTERIOR_MARGIN: f64 = 1e-12;

/// Slack allowed when comparing an observed normal constant to the declared one.
pub const NORMALITY_SLACK: f64 = 1e-12;

/// Absolute tolerance for approximate equality of `EVector`s outside the order axioms.
pub const APPROX_EQ_TOL: f64 = 1e-12;

/// An element of the discretized space `E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EVector(Vec<f64>);

impl EVector {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("samples", "an EVector needs at least one coordinate"));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index });
        }
        Ok(Self(samples))
    }

    pub fn zeros(dimension: usize) -> Self {
        Self(vec![0.0; dimension.max(1)])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.0
    }

    /// Sup norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.dimension() == other.dimension()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| (a - b).abs() <= APPROX_EQ_TOL)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: other.dimension(),
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }
}

/// Membership rule of a cone.
///
/// `Orthant` is the only cone the solver is meant to run on. `RelaxedFirst`
/// accepts `x_0 >= -slack` on the first coordinate and is not a cone at all; it
/// exists so the axiom fuzzers have something to catch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeKind {
    Orthant,
    RelaxedFirst { slack: f64 },
}

/// A cone `P` in `E` together with its interior margin and declared normal constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    dimension: usize,
    kind: ConeKind,
    interior_margin: f64,
    normal_constant: f64,
}

impl ConeSpec {
    /// The nonnegative orthant of `R^m` with margin `1e-12` and `K = 1`.
    pub fn orthant(dimension: usize) -> Result<Self> {
        Self::new(dimension, ConeKind::Orthant, DEFAULT_INTERIOR_MARGIN, 1.0)
    }

    /// The declared normal constant only has to be positive here; whether it is
    /// actually a normal constant of the cone is what [`verify_normality`] checks.
    pub fn new(
        dimension: usize,
        kind: ConeKind,
        interior_margin: f64,
        normal_constant: f64,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        if !(interior_margin > 0.0 && interior_margin.is_finite()) {
            return Err(invalid("interior_margin", "must be positive and finite"));
        }
        if !(normal_constant > 0.0 && normal_constant.is_finite()) {
            return Err(invalid("normal_constant", "must be positive and finite"));
        }
        if let ConeKind::RelaxedFirst { slack } = kind {
            if !(slack >= 0.0 && slack.is_finite()) {
                return Err(invalid("slack", "must be nonnegative and finite"));
            }
        }
        Ok(Self {
            dimension,
            kind,
            interior_margin,
            normal_constant,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn interior_margin(&self) -> f64 {
        self.interior_margin
    }

    pub fn normal_constant(&self) -> f64 {
        self.normal_constant
    }

    fn check_dim(&self, x: &EVector) -> Result<()> {
        if x.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.dimension(),
            });
        }
        Ok(())
    }

    fn admits(&self, x: &[f64]) -> bool {
        match self.kind {
            ConeKind::Orthant => x.iter().all(|&v| v >= 0.0),
            ConeKind::RelaxedFirst { slack } => {
                x[0] >= -slack && x[1..].iter().all(|&v| v >= 0.0)
            }
        }
    }

    fn admits_interior(&self, x: &[f64]) -> bool {
        let eps = self.interior_margin;
        match self.kind {
            ConeKind::Orthant => x.iter().all(|&v| v >= eps),
            ConeKind::RelaxedFirst { slack } => {
                x[0] >= eps - slack && x[1..].iter().all(|&v| v >= eps)
            }
        }
    }

    /// Index of the first coordinate that keeps `x` out of the cone.
    fn violating_index(&self, x: &[f64]) -> Option<usize> {
        match self.kind {
            ConeKind::Orthant => x.iter().position(|&v| v < 0.0),
            ConeKind::RelaxedFirst { slack } => {
                if x[0] < -slack {
                    Some(0)
                } else {
                    x[1..].iter().position(|&v| v < 0.0).map(|i| i + 1)
                }
            }
        }
    }

    /// `x ∈ P`, exact.
    pub fn contains(&self, x: &EVector) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.admits(x.samples()))
    }

    /// Numerical stand-in for `x ∈ Int P`: every coordinate at least the margin.
    pub fn interior_contains(&self, x: &EVector) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.admits_interior(x.samples()))
    }

    /// Compare `x` and `y` in the order induced by the cone.
    pub fn compare(&self, x: &EVector, y: &EVector) -> Result<OrderReport> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let diff = y.sub(x)?;
        let d = diff.samples();
        let report = if x == y {
            OrderReport::new(Relation::Leq, None)
        } else if self.admits_interior(d) {
            OrderReport::new(Relation::Ll, None)
        } else if self.admits(d) {
            OrderReport::new(Relation::Lt, None)
        } else {
            OrderReport::new(Relation::Incomparable, self.violating_index(d))
        };
        Ok(report)
    }
}

/// Strongest relation that holds from `x` to `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `x <= y` and `x == y`.
    Leq,
    /// `x <= y`, `x != y`, `y - x` not in the interior.
    Lt,
    /// `y - x` in the interior.
    Ll,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderReport {
    pub relation: Relation,
    pub witness: Option<usize>,
}

impl OrderReport {
    fn new(relation: Relation, witness: Option<usize>) -> Self {
        Self { relation, witness }
    }

    pub fn is_leq(&self) -> bool {
        !matches!(self.relation, Relation::Incomparable)
    }

    pub fn is_lt(&self) -> bool {
        matches!(self.relation, Relation::Lt | Relation::Ll)
    }

    pub fn is_ll(&self) -> bool {
        matches!(self.relation, Relation::Ll)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::Leq => "leq",
            Relation::Lt => "lt",
            Relation::Ll => "ll",
            Relation::Incomparable => "incomparable",
        };
        f.write_str(s)
    }
}

pub fn cone_contains(cone: &ConeSpec, x: &EVector) -> Result<bool> {
    cone.contains(x)
}

pub fn cone_interior_contains(cone: &ConeSpec, x: &EVector) -> Result<bool> {
    cone.interior_contains(x)
}

pub fn compare(cone: &ConeSpec, x: &EVector, y: &EVector) -> Result<OrderReport> {
    cone.compare(x, y)
}

/// Maximum number of counterexamples retained per axiom.
pub const MAX_COUNTEREXAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub note: String,
    pub vectors: Vec<Vec<f64>>,
}

/// Outcome of one axiom over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomOutcome {
    pub axiom: String,
    pub checked: usize,
    pub failures: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl AxiomOutcome {
    pub(crate) fn new(axiom: &str) -> Self {
        Self {
            axiom: axiom.to_string(),
            checked: 0,
            failures: 0,
            counterexamples: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, ok: bool, note: impl FnOnce() -> String, vectors: impl FnOnce() -> Vec<Vec<f64>>) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(Counterexample {
                    note: note(),
                    vectors: vectors(),
                });
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub suite: String,
    pub outcomes: Vec<AxiomOutcome>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(AxiomOutcome::passed)
    }

    pub fn outcome(&self, axiom: &str) -> Option<&AxiomOutcome> {
        self.outcomes.iter().find(|o| o.axiom == axiom)
    }
}

fn check_samples(sample_count: usize) -> Result<()> {
    if sample_count == 0 {
        return Err(invalid("sample_count", "must be at least 1"));
    }
    Ok(())
}

/// Draw up to `count` members of the cone by filtering candidates through its
/// own membership test. The zero vector is always the first member.
fn sample_members(cone: &ConeSpec, count: usize, rng: &mut sampling::SampleRng) -> Vec<Vec<f64>> {
    let m = cone.dimension;
    let mut members = vec![vec![0.0; m]];
    let mut attempts = 0usize;
    while members.len() < count && attempts < 64 * count {
        attempts += 1;
        let c = sampling::cone_candidate(rng, m);
        if cone.admits(&c) {
            members.push(c);
        }
    }
    members
}

/// Fuzz the cone axioms.
///
/// P1 (closed, nonempty, not `{0}`) holds structurally for every [`ConeKind`]
/// and is reported as a single structural check. P2 is checked on random
/// nonnegative combinations of sampled members, P3 on every nonzero sampled
/// member.
pub fn verify_cone_axioms(cone: &ConeSpec, sample_count: usize, seed: u64) -> Result<AxiomReport> {
    check_samples(sample_count)?;
    let mut rng = sampling::rng(seed);
    let members = sample_members(cone, sample_count, &mut rng);

    let mut p1 = AxiomOutcome::new("P1");
    let mut unit = vec![0.0; cone.dimension];
    unit[0] = 1.0;
    p1.record(
        cone.admits(&vec![0.0; cone.dimension]) && cone.admits(&unit),
        || "structural: cone must contain 0 and a nonzero vector".into(),
        Vec::new,
    );

    let mut p2 = AxiomOutcome::new("P2");
    let mut p3 = AxiomOutcome::new("P3");
    use rand::Rng;
    for i in 0..sample_count {
        let x = &members[i % members.len()];
        let y = &members[rng.gen_range(0..members.len())];
        let a = sampling::nonnegative_scalar(&mut rng);
        let b = sampling::nonnegative_scalar(&mut rng);
        let combo: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect();
        p2.record(
            cone.admits(&combo),
            || format!("a = {a}, b = {b}: a·x + b·y left the cone"),
            || vec![x.clone(), y.clone()],
        );
    }
    for x in members.iter().filter(|x| x.iter().any(|&v| v != 0.0)) {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        p3.record(
            !cone.admits(&neg),
            || "x and -x both accepted with x != 0".into(),
            || vec![x.clone(), neg.clone()],
        );
    }
    Ok(AxiomReport {
        suite: "cone".into(),
        outcomes: vec![p1, p2, p3],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub declared: f64,
    pub observed: f64,
    pub pairs_checked: usize,
    pub pass: bool,
    /// Pair `(x, y)` with `0 <= x <= y` attaining the observed ratio.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

/// Sample pairs `0 <= x <= y` and report the largest ratio `‖x‖ / ‖y‖`.
///
/// The first pair is always `x = y`, so any declared constant below 1 is
/// refuted with that pair as witness.
pub fn verify_normality(cone: &ConeSpec, sample_count: usize, seed: u64) -> Result<NormalityReport> {
    use rand::Rng;
    check_samples(sample_count)?;
    let mut rng = sampling::rng(seed);
    let members = sample_members(cone, sample_count + 1, &mut rng);
    let mut observed = 0.0f64;
    let mut witness = None;
    let mut checked = 0usize;
    let nonzero: Vec<&Vec<f64>> = members.iter().filter(|y| y.iter().any(|&v| v != 0.0)).collect();
    for i in 0..sample_count {
        let Some(y) = nonzero.get(i % nonzero.len().max(1)) else {
            break;
        };
        let x: Vec<f64> = if i == 0 {
            (*y).clone()
        } else {
            y.iter()
                .map(|&v| match rng.gen_range(0..4) {
                    0 => v,
                    1 => 0.0,
                    _ => v * rng.gen_range(0.0..=1.0),
                })
                .collect()
        };
        let gap: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        if !(cone.admits(&x) && cone.admits(&gap)) {
            continue;
        }
        let ny = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if ny == 0.0 {
            continue;
        }
        let nx = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        checked += 1;
        let ratio = nx / ny;
        if ratio > observed {
            observed = ratio;
            witness = Some((x, (*y).clone()));
        }
    }
    Ok(NormalityReport {
        declared: cone.normal_constant,
        observed,
        pairs_checked: checked,
        pass: observed <= cone.normal_constant + NORMALITY_SLACK,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> EVector {
        EVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn membership_examples() {
        let cone = ConeSpec::orthant(3).unwrap();
        assert!(cone.contains(&v(&[0.0, 0.0, 0.0])).unwrap());
        assert!(cone.contains(&v(&[1.0, 2.0, 3.0])).unwrap());
        assert!(!cone.contains(&v(&[1.0, -0.001, 3.0])).unwrap());
        assert!(matches!(
            cone.contains(&v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn interior_examples() {
        let cone = ConeSpec::orthant(2).unwrap();
        assert!(cone.interior_contains(&v(&[1.0, 1.0])).unwrap());
        assert!(!cone.interior_contains(&v(&[1.0, 0.0])).unwrap());
        assert!(!cone.interior_contains(&v(&[1e-13, 1.0])).unwrap());
    }

    #[test]
    fn compare_examples() {
        let cone = ConeSpec::orthant(2).unwrap();
        let r = cone.compare(&v(&[0.0, 0.0]), &v(&[0.0, 0.0])).unwrap();
        assert_eq!(r.relation, Relation::Leq);
        assert!(!r.is_lt());
        assert_eq!(cone.compare(&v(&[1.0, 2.0]), &v(&[2.0, 3.0])).unwrap().relation, Relation::Ll);
        let r = cone.compare(&v(&[1.0, 2.0]), &v(&[2.0, 1.0])).unwrap();
        assert_eq!(r.relation, Relation::Incomparable);
        assert_eq!(r.witness, Some(1));
        let r = cone.compare(&v(&[1.0, 2.0]), &v(&[1.0, 3.0])).unwrap();
        assert_eq!(r.relation, Relation::Lt);
    }

    #[test]
    fn evector_rejects_non_finite() {
        assert!(matches!(
            EVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFiniteCoordinate { index: 1 })
        ));
        assert!(EVector::new(vec![]).is_err());
        assert_eq!(v(&[0.0, -3.0, 2.0]).norm(), 3.0);
        assert_eq!(EVector::zeros(4).norm(), 0.0);
    }

    #[test]
    fn cone_spec_validation() {
        assert!(ConeSpec::new(0, ConeKind::Orthant, 1e-12, 1.0).is_err());
        assert!(ConeSpec::new(2, ConeKind::Orthant, 0.0, 1.0).is_err());
        assert!(ConeSpec::new(2, ConeKind::Orthant, 1e-12, 0.0).is_err());
        assert!(ConeSpec::new(2, ConeKind::Orthant, 1e-12, 0.5).is_ok());
    }

    #[test]
    fn orthant_passes_axioms() {
        let cone = ConeSpec::orthant(4).unwrap();
        let report = verify_cone_axioms(&cone, 1000, 42).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.outcome("P3").unwrap().checked > 100);
    }

    #[test]
    fn relaxed_cone_fails_p3() {
        let cone = ConeSpec::new(4, ConeKind::RelaxedFirst { slack: 0.1 }, 1e-12, 1.0).unwrap();
        let report = verify_cone_axioms(&cone, 1000, 42).unwrap();
        let p3 = report.outcome("P3").unwrap();
        assert!(!p3.passed());
        let ce = &p3.counterexamples[0].vectors;
        assert!(cone.admits(&ce[0]) && cone.admits(&ce[1]));
    }

    #[test]
    fn zero_samples_rejected() {
        let cone = ConeSpec::orthant(2).unwrap();
        assert!(verify_cone_axioms(&cone, 0, 1).is_err());
        assert!(verify_normality(&cone, 0, 1).is_err());
    }

    #[test]
    fn normality_of_orthant() {
        let cone = ConeSpec::orthant(5).unwrap();
        let r = verify_normality(&cone, 2000, 9).unwrap();
        assert!(r.pass);
        assert_eq!(r.observed, 1.0);
        assert!(r.pairs_checked > 1000);
    }

    #[test]
    fn undersized_normal_constant_fails_with_equal_pair() {
        let cone = ConeSpec::new(3, ConeKind::Orthant, 1e-12, 0.5).unwrap();
        let r = verify_normality(&cone, 500, 1).unwrap();
        assert!(!r.pass);
        let (x, y) = r.witness.unwrap();
        assert_eq!(x, y);
    }
}
