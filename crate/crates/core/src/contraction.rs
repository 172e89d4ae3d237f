//! Sampled checks of the T-Kannan (TK1) and T-Chatterjea (TK2) conditions and
//! estimation of the smallest admissible constant.
//!
//! For a pair `(x, y)` the left side is `d(TSx, TSy)`. The bracketed sum on
//! the right is
//!
//! ```text
//! TK1:  d(Tx, TSx) + d(Ty, TSy)
//! TK2:  d(Tx, TSy) + d(Ty, TSx)
//! ```
//!
//! and the inequality `lhs <= b * sum` is checked in the cone order, one
//! coordinate of `E` at a time. K1 and K2 are the same conditions with `T`
//! replaced by the identity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cone_metric::{ConeMetricSpace, MPoint};
use crate::error::{invalid, Result};
use crate::maps::{DomainBox, MapExpr};
use crate::ordered_space::EVector;
use crate::sampling;

/// Per-coordinate slack on the cone-order inequality.
pub const CONDITION_SLACK: f64 = 1e-9;

/// Violations kept verbatim in a report; the total is always counted.
pub const MAX_REPORTED_VIOLATIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContractionKind {
    /// T-Kannan.
    TK1,
    /// T-Chatterjea.
    TK2,
    /// Kannan: TK1 with `T` the identity.
    K1,
    /// Chatterjea: TK2 with `T` the identity.
    K2,
}

impl ContractionKind {
    pub fn is_kannan(self) -> bool {
        matches!(self, ContractionKind::TK1 | ContractionKind::K1)
    }

    pub fn ignores_t(self) -> bool {
        matches!(self, ContractionKind::K1 | ContractionKind::K2)
    }
}

impl fmt::Display for ContractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Constants must lie in `[0, 1/2)`.
pub fn check_constant(constant: f64) -> Result<()> {
    if !(0.0..0.5).contains(&constant) {
        return Err(invalid("constant", format!("constant out of [0, 1/2): got {constant}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairViolation {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lhs_norm: f64,
    pub rhs_norm: f64,
}

/// Smallest constant consistent with every sampled pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConstantEstimate {
    Finite { value: f64 },
    /// Some pair has a zero coordinate in the bracketed sum where the left
    /// side is nonzero; no finite constant works.
    Undefined { x: Vec<f64>, y: Vec<f64> },
}

impl ConstantEstimate {
    pub fn value(&self) -> Option<f64> {
        match self {
            ConstantEstimate::Finite { value } => Some(*value),
            ConstantEstimate::Undefined { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub kind: ContractionKind,
    pub constant: f64,
    pub pairs_checked: usize,
    pub violation_count: usize,
    /// First violations in pair order.
    pub violations: Vec<PairViolation>,
    pub estimated_min_constant: ConstantEstimate,
}

impl ContractionReport {
    pub fn is_clean(&self) -> bool {
        self.violation_count == 0
    }

    /// Equality of everything except the kind tag.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.constant.to_bits() == other.constant.to_bits()
            && self.pairs_checked == other.pairs_checked
            && self.violation_count == other.violation_count
            && self.violations == other.violations
            && self.estimated_min_constant == other.estimated_min_constant
    }
}

/// `T`, `S` and the space bundled for pair evaluation.
#[derive(Debug, Clone, Copy)]
pub struct PairEvaluator<'a> {
    space: &'a ConeMetricSpace,
    t_map: Option<&'a MapExpr>,
    s_map: &'a MapExpr,
    kind: ContractionKind,
}

/// Both sides of the condition at one pair, before the constant is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSides {
    pub lhs: EVector,
    pub sum: EVector,
}

impl PairSides {
    /// Smallest constant that makes this pair satisfy the condition, `None`
    /// when no finite constant does, `Some(0)` for the vacuous `0 <= b·0`.
    pub fn min_constant(&self) -> Option<f64> {
        let mut worst = 0.0f64;
        for (&l, &s) in self.lhs.samples().iter().zip(self.sum.samples()) {
            if s == 0.0 {
                if l != 0.0 {
                    return None;
                }
            } else {
                worst = worst.max(l / s);
            }
        }
        Some(worst)
    }

    pub fn holds(&self, constant: f64) -> bool {
        self.lhs
            .samples()
            .iter()
            .zip(self.sum.samples())
            .all(|(&l, &s)| constant * s - l >= -CONDITION_SLACK)
    }
}

impl<'a> PairEvaluator<'a> {
    pub fn new(space: &'a ConeMetricSpace, t_map: &'a MapExpr, s_map: &'a MapExpr, kind: ContractionKind) -> Self {
        Self {
            space,
            t_map: if kind.ignores_t() { None } else { Some(t_map) },
            s_map,
            kind,
        }
    }

    fn t(&self, p: &MPoint) -> Result<MPoint> {
        match self.t_map {
            Some(t) => t.eval(p),
            None => Ok(p.clone()),
        }
    }

    pub fn sides(&self, x: &MPoint, y: &MPoint) -> Result<PairSides> {
        let sx = self.s_map.eval(x)?;
        let sy = self.s_map.eval(y)?;
        let tx = self.t(x)?;
        let ty = self.t(y)?;
        let tsx = self.t(&sx)?;
        let tsy = self.t(&sy)?;
        let d = |a: &MPoint, b: &MPoint| self.space.distance(a, b);
        let lhs = d(&tsx, &tsy)?;
        let sum = if self.kind.is_kannan() {
            d(&tx, &tsx)?.add(&d(&ty, &tsy)?)?
        } else {
            d(&tx, &tsy)?.add(&d(&ty, &tsx)?)?
        };
        Ok(PairSides { lhs, sum })
    }
}

fn scan(
    evaluator: &PairEvaluator<'_>,
    pairs: &[(Vec<f64>, Vec<f64>)],
    constant: Option<f64>,
) -> Result<(Vec<PairViolation>, usize, ConstantEstimate)> {
    let mut violations = Vec::new();
    let mut count = 0usize;
    let mut estimate = 0.0f64;
    let mut undefined: Option<(Vec<f64>, Vec<f64>)> = None;
    for (index, (x, y)) in pairs.iter().enumerate() {
        let px = MPoint::new(x.clone())?;
        let py = MPoint::new(y.clone())?;
        let sides = evaluator.sides(&px, &py)?;
        match sides.min_constant() {
            Some(c) => estimate = estimate.max(c),
            None => {
                if undefined.is_none() {
                    undefined = Some((x.clone(), y.clone()));
                }
            }
        }
        if let Some(b) = constant {
            if !sides.holds(b) {
                count += 1;
                if violations.len() < MAX_REPORTED_VIOLATIONS {
                    violations.push(PairViolation {
                        index,
                        x: x.clone(),
                        y: y.clone(),
                        lhs_norm: sides.lhs.norm(),
                        rhs_norm: sides.sum.scale(b).norm(),
                    });
                }
            }
        }
    }
    let estimate = match undefined {
        Some((x, y)) => ConstantEstimate::Undefined { x, y },
        None => ConstantEstimate::Finite { value: estimate },
    };
    Ok((violations, count, estimate))
}

fn check_pairs(sample_pairs: usize, domain: &DomainBox, space: &ConeMetricSpace) -> Result<()> {
    if sample_pairs == 0 {
        return Err(invalid("sample_pairs", "must be at least 1"));
    }
    if domain.dimension() != space.point_dimension() {
        return Err(invalid("domain", "dimension differs from the point dimension"));
    }
    Ok(())
}

/// Check the condition of `kind` with the given constant on sampled pairs.
/// The same pass records the smallest constant the samples admit.
#[allow(clippy::too_many_arguments)]
pub fn check_condition(
    space: &ConeMetricSpace,
    t_map: &MapExpr,
    s_map: &MapExpr,
    kind: ContractionKind,
    constant: f64,
    sample_pairs: usize,
    domain: &DomainBox,
    seed: u64,
) -> Result<ContractionReport> {
    check_constant(constant)?;
    check_pairs(sample_pairs, domain, space)?;
    let pairs = sampling::sample_pairs(domain, sample_pairs, seed);
    let evaluator = PairEvaluator::new(space, t_map, s_map, kind);
    let (violations, violation_count, estimated_min_constant) = scan(&evaluator, &pairs, Some(constant))?;
    Ok(ContractionReport {
        kind,
        constant,
        pairs_checked: pairs.len(),
        violation_count,
        violations,
        estimated_min_constant,
    })
}

/// Supremum over sampled pairs of the per-pair minimal constant.
pub fn estimate_min_constant(
    space: &ConeMetricSpace,
    t_map: &MapExpr,
    s_map: &MapExpr,
    kind: ContractionKind,
    sample_pairs: usize,
    domain: &DomainBox,
    seed: u64,
) -> Result<ConstantEstimate> {
    check_pairs(sample_pairs, domain, space)?;
    let pairs = sampling::sample_pairs(domain, sample_pairs, seed);
    let evaluator = PairEvaluator::new(space, t_map, s_map, kind);
    Ok(scan(&evaluator, &pairs, None)?.2)
}

/// Kannan condition `d(Sx, Sy) <= b [d(x, Sx) + d(y, Sy)]`: the K1 check with
/// `T` the identity.
pub fn kannan_reduction_check(
    space: &ConeMetricSpace,
    s_map: &MapExpr,
    constant: f64,
    sample_pairs: usize,
    domain: &DomainBox,
    seed: u64,
) -> Result<ContractionReport> {
    let identity = MapExpr::identity(space.point_dimension());
    check_condition(space, &identity, s_map, ContractionKind::K1, constant, sample_pairs, domain, seed)
}

/// Chatterjea counterpart of [`kannan_reduction_check`].
pub fn chatterjea_reduction_check(
    space: &ConeMetricSpace,
    s_map: &MapExpr,
    constant: f64,
    sample_pairs: usize,
    domain: &DomainBox,
    seed: u64,
) -> Result<ContractionReport> {
    let identity = MapExpr::identity(space.point_dimension());
    check_condition(space, &identity, s_map, ContractionKind::K2, constant, sample_pairs, domain, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::parse_map;

    fn setup() -> (ConeMetricSpace, MapExpr, MapExpr, DomainBox) {
        (
            ConeMetricSpace::exp_weighted_line(33).unwrap(),
            parse_map("x^2").unwrap(),
            parse_map("x/2").unwrap(),
            DomainBox::interval(-10.0, 10.0).unwrap(),
        )
    }

    #[test]
    fn square_half_is_tk1_at_one_third() {
        let (space, t, s, dom) = setup();
        let r = check_condition(&space, &t, &s, ContractionKind::TK1, 1.0 / 3.0, 5000, &dom, 42).unwrap();
        assert!(r.is_clean(), "{:?}", r.violations.first());
        let est = r.estimated_min_constant.value().unwrap();
        assert!((est - 1.0 / 3.0).abs() < 1e-3);
        assert!(est <= 1.0 / 3.0 + 1e-9);
    }

    #[test]
    fn square_half_fails_below_one_third() {
        let (space, t, s, dom) = setup();
        let r = check_condition(&space, &t, &s, ContractionKind::TK1, 0.2, 5000, &dom, 42).unwrap();
        assert!(!r.is_clean());
        // direct evaluation at (1, 0): lhs = 1/4 ‖e^t‖, sum = 3/4 ‖e^t‖
        let sides = PairEvaluator::new(&space, &t, &s, ContractionKind::TK1)
            .sides(&MPoint::scalar(1.0).unwrap(), &MPoint::scalar(0.0).unwrap())
            .unwrap();
        assert!((sides.min_constant().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(!sides.holds(0.2));
    }

    #[test]
    fn constant_map_is_trivially_contractive() {
        let (space, t, _, dom) = setup();
        let s = parse_map("constant(1.5)").unwrap();
        let r = check_condition(&space, &t, &s, ContractionKind::TK1, 0.0, 2000, &dom, 1).unwrap();
        assert!(r.is_clean());
    }

    #[test]
    fn identity_pair_has_no_finite_constant() {
        let (space, _, _, dom) = setup();
        let id = MapExpr::identity(1);
        let est = estimate_min_constant(&space, &id, &id, ContractionKind::K1, 500, &dom, 1).unwrap();
        assert!(matches!(est, ConstantEstimate::Undefined { .. }));
    }

    #[test]
    fn constant_out_of_range() {
        let (space, t, s, dom) = setup();
        assert!(check_condition(&space, &t, &s, ContractionKind::TK1, 0.5, 10, &dom, 1).is_err());
        assert!(check_condition(&space, &t, &s, ContractionKind::TK1, -0.1, 10, &dom, 1).is_err());
        assert!(check_condition(&space, &t, &s, ContractionKind::TK1, 0.1, 0, &dom, 1).is_err());
    }

    #[test]
    fn kannan_presets() {
        let space = ConeMetricSpace::exp_weighted_line(33).unwrap();
        let dom = DomainBox::interval(-10.0, 10.0).unwrap();
        let fifth = parse_map("x/5").unwrap();
        assert!(kannan_reduction_check(&space, &fifth, 0.25, 5000, &dom, 3).unwrap().is_clean());
        let half = parse_map("x/2").unwrap();
        let r = kannan_reduction_check(&space, &half, 0.49, 5000, &dom, 3).unwrap();
        assert!(!r.is_clean());
        assert!(r.violations.iter().any(|v| v.y == vec![0.0] && v.x[0] != 0.0));
        let zero = parse_map("0").unwrap();
        assert!(kannan_reduction_check(&space, &zero, 0.0, 500, &dom, 3).unwrap().is_clean());
    }

    #[test]
    fn evaluation_failure_propagates() {
        let (space, t, _, dom) = setup();
        let s = parse_map("1/x").unwrap();
        assert!(check_condition(&space, &t, &s, ContractionKind::TK1, 0.3, 100, &dom, 1).is_err());
    }
}
