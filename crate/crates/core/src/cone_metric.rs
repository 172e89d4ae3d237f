//! Cone metric spaces `(M, d)` with `d` valued in the discretized space `E`,
//! and the norm-level sequence tests that stand in for cone-order convergence
//! when the cone is normal.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::maps::{parse_expr, Env, Expr, Symbols};
use crate::ordered_space::{AxiomOutcome, AxiomReport, ConeSpec, EVector};
use crate::sampling;

/// Per-coordinate slack on the triangle inequality.
pub const TRIANGLE_SLACK: f64 = 1e-9;

/// Default tolerance for the sequence tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Half-width of the box metric-axiom triples are drawn from.
pub const AXIOM_SAMPLE_RADIUS: f64 = 10.0;

/// A point of `M = R^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MPoint(Vec<f64>);

impl MPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("coords", "a point needs at least one coordinate"));
        }
        if let Some(index) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index });
        }
        Ok(Self(coords))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// Scalar metric `ρ` on `M` that the weight scales into `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseDistance {
    /// `Σ |x_i - y_i|`; plain `|x - y|` on the line.
    #[default]
    AbsoluteDifference,
    Euclidean,
}

impl BaseDistance {
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            BaseDistance::AbsoluteDifference => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            BaseDistance::Euclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Grid abscissae `t_i = i / (m - 1)`; a single node sits at `t = 0`.
pub fn grid(m: usize) -> Vec<f64> {
    if m <= 1 {
        return vec![0.0];
    }
    (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
}

/// `(M, d)` with `d(x, y) = ρ(x, y) · w`, `w` the weight sampled on the grid.
///
/// The weight is not required to be positive at construction so that broken
/// spaces can be fed to [`verify_metric_axioms`]; [`Self::weight_is_admissible`]
/// reports whether it clears the cone's interior margin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeMetricSpace {
    point_dimension: usize,
    cone: ConeSpec,
    weight_source: String,
    weight: EVector,
    base: BaseDistance,
}

impl ConeMetricSpace {
    pub fn new(point_dimension: usize, cone: ConeSpec, weight: &str, base: BaseDistance) -> Result<Self> {
        let expr = parse_expr(
            weight,
            Symbols {
                point_dimension: 0,
                allow_t: true,
            },
        )?;
        Self::from_weight_expr(point_dimension, cone, &expr, weight.trim().to_string(), base)
    }

    fn from_weight_expr(
        point_dimension: usize,
        cone: ConeSpec,
        expr: &Expr,
        weight_source: String,
        base: BaseDistance,
    ) -> Result<Self> {
        if point_dimension == 0 {
            return Err(invalid("point_dimension", "must be at least 1"));
        }
        let samples = grid(cone.dimension())
            .into_iter()
            .map(|t| expr.eval(&Env { point: &[], t }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            point_dimension,
            cone,
            weight_source,
            weight: EVector::new(samples)?,
            base,
        })
    }

    /// `M = R`, `E = C[0,1]` on an `m`-point grid, `d(x, y) = |x - y| e^t`.
    pub fn exp_weighted_line(m: usize) -> Result<Self> {
        Self::new(1, ConeSpec::orthant(m)?, "exp(t)", BaseDistance::AbsoluteDifference)
    }

    /// Ordinary metric on `R^k` seen as a cone metric with `E = R`, `P = [0, ∞)`.
    pub fn standard(point_dimension: usize, base: BaseDistance) -> Result<Self> {
        Self::new(point_dimension, ConeSpec::orthant(1)?, "1", base)
    }

    pub fn point_dimension(&self) -> usize {
        self.point_dimension
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn weight(&self) -> &EVector {
        &self.weight
    }

    pub fn weight_source(&self) -> &str {
        &self.weight_source
    }

    pub fn base(&self) -> BaseDistance {
        self.base
    }

    pub fn normal_constant(&self) -> f64 {
        self.cone.normal_constant()
    }

    pub fn min_weight(&self) -> f64 {
        self.weight.samples().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn weight_is_admissible(&self) -> bool {
        self.min_weight() >= self.cone.interior_margin()
    }

    fn check_point(&self, p: &MPoint) -> Result<()> {
        if p.dimension() != self.point_dimension {
            return Err(Error::DimensionMismatch {
                expected: self.point_dimension,
                actual: p.dimension(),
            });
        }
        Ok(())
    }

    /// Scalar base distance `ρ(x, y)`.
    pub fn base_distance(&self, x: &MPoint, y: &MPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.base.eval(x.coords(), y.coords()))
    }

    pub fn distance(&self, x: &MPoint, y: &MPoint) -> Result<EVector> {
        let rho = self.base_distance(x, y)?;
        Ok(self.weight.scale(rho))
    }

    /// `‖d(x, y)‖`.
    pub fn distance_norm(&self, x: &MPoint, y: &MPoint) -> Result<f64> {
        Ok(self.distance(x, y)?.norm())
    }
}

pub fn distance(space: &ConeMetricSpace, x: &MPoint, y: &MPoint) -> Result<EVector> {
    space.distance(x, y)
}

/// Fuzz d1 (positivity), d2 (exact symmetry) and d3 (triangle inequality in
/// the cone order, `1e-9` slack per coordinate) on triples drawn from
/// `[-10, 10]^k`. Every eighth triple is degenerate (two or three equal points).
pub fn verify_metric_axioms(space: &ConeMetricSpace, sample_count: usize, seed: u64) -> Result<AxiomReport> {
    use rand::Rng;
    if sample_count == 0 {
        return Err(invalid("sample_count", "must be at least 1"));
    }
    let k = space.point_dimension;
    let cone = space.cone();
    let mut rng = sampling::rng(seed);
    let draw = |rng: &mut sampling::SampleRng| -> MPoint {
        MPoint((0..k).map(|_| rng.gen_range(-AXIOM_SAMPLE_RADIUS..=AXIOM_SAMPLE_RADIUS)).collect())
    };
    let mut d1 = AxiomOutcome::new("d1");
    let mut d2 = AxiomOutcome::new("d2");
    let mut d3 = AxiomOutcome::new("d3");
    for i in 0..sample_count {
        let mut x = draw(&mut rng);
        let mut y = draw(&mut rng);
        let mut z = draw(&mut rng);
        if i % 8 == 0 {
            match (i / 8) % 4 {
                0 => y = x.clone(),
                1 => z = y.clone(),
                2 => z = x.clone(),
                _ => {
                    y = x.clone();
                    z = x.clone();
                }
            }
        }
        if i == 0 {
            x = MPoint(vec![0.0; k]);
            y = x.clone();
            z = x.clone();
        }
        let pairs = [(&x, &y), (&x, &z), (&y, &z)];
        for (a, b) in pairs {
            let dab = space.distance(a, b)?;
            let dba = space.distance(b, a)?;
            let positive = cone.contains(&dab)? && ((a == b) == dab.is_zero());
            d1.record(
                positive,
                || "d(x, y) outside the cone or zero-iff-equal broken".into(),
                || vec![a.0.clone(), b.0.clone(), dab.samples().to_vec()],
            );
            let symmetric = dab
                .samples()
                .iter()
                .zip(dba.samples())
                .all(|(u, v)| u.to_bits() == v.to_bits());
            d2.record(symmetric, || "d(x, y) != d(y, x)".into(), || vec![a.0.clone(), b.0.clone()]);
        }
        // each side against the other two, all sharing the third point as pivot
        for (a, b, pivot) in [(&x, &y, &z), (&x, &z, &y), (&y, &z, &x)] {
            let lhs = space.distance(a, b)?;
            let rhs = space.distance(a, pivot)?.add(&space.distance(b, pivot)?)?;
            let ok = lhs
                .samples()
                .iter()
                .zip(rhs.samples())
                .all(|(l, r)| r - l >= -TRIANGLE_SLACK);
            d3.record(
                ok,
                || "d(x, y) > d(x, z) + d(y, z)".into(),
                || vec![a.0.clone(), b.0.clone(), pivot.0.clone()],
            );
        }
    }
    Ok(AxiomReport {
        suite: "metric".into(),
        outcomes: vec![d1, d2, d3],
    })
}

/// Number of trailing terms over which "eventually" is judged.
pub fn tail_len(len: usize) -> usize {
    (len / 4).max(5).min(len)
}

/// Distances of a finite sequence to a candidate limit, and the pairwise
/// distance norms over its trailing window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceTrace {
    pub points: Vec<MPoint>,
    pub distances_to_limit: Vec<f64>,
    pub pairwise_tail: Vec<Vec<f64>>,
}

impl SequenceTrace {
    pub fn build(space: &ConeMetricSpace, seq: &[MPoint], limit: Option<&MPoint>) -> Result<Self> {
        let distances_to_limit = match limit {
            Some(l) => seq
                .iter()
                .map(|p| space.distance_norm(p, l))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let tail = &seq[seq.len() - tail_len(seq.len())..];
        let pairwise_tail = tail
            .iter()
            .map(|a| tail.iter().map(|b| space.distance_norm(a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points: seq.to_vec(),
            distances_to_limit,
            pairwise_tail,
        })
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(invalid("tol", "must be positive and finite"));
    }
    Ok(())
}

/// `‖d(x_n, limit)‖ <= tol` over the trailing window.
///
/// Valid as a convergence test because the cone is normal: convergence in the
/// cone order is equivalent to `‖d(x_n, x)‖ → 0`.
pub fn sequence_converges(space: &ConeMetricSpace, seq: &[MPoint], limit: &MPoint, tol: f64) -> Result<bool> {
    check_tol(tol)?;
    if seq.is_empty() {
        return Err(invalid("seq", "sequence is empty"));
    }
    let tail = &seq[seq.len() - tail_len(seq.len())..];
    for p in tail {
        if space.distance_norm(p, limit)? > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Max of `‖d(x_n, x_m)‖` over the trailing window is at most `tol`.
pub fn is_cauchy(space: &ConeMetricSpace, seq: &[MPoint], tol: f64) -> Result<bool> {
    check_tol(tol)?;
    if seq.len() < 2 {
        return Err(invalid("seq", "need at least two terms"));
    }
    let trace = SequenceTrace::build(space, seq, None)?;
    Ok(trace
        .pairwise_tail
        .iter()
        .flatten()
        .all(|&d| d <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordered_space::ConeKind;

    fn p(x: f64) -> MPoint {
        MPoint::scalar(x).unwrap()
    }

    #[test]
    fn weighted_distance_examples() {
        let space = ConeMetricSpace::exp_weighted_line(33).unwrap();
        let d = space.distance(&p(2.0), &p(0.0)).unwrap();
        for (di, t) in d.samples().iter().zip(grid(33)) {
            assert_eq!(*di, 2.0 * t.exp());
        }
        assert!(space.distance(&p(1.5), &p(1.5)).unwrap().is_zero());
        let two = ConeMetricSpace::exp_weighted_line(2).unwrap();
        let d = two.distance(&p(1.0), &p(0.0)).unwrap();
        assert_eq!(d.samples(), &[1.0, std::f64::consts::E]);
        assert!(space.distance(&p(1.0), &MPoint::new(vec![1.0, 2.0]).unwrap()).is_err());
    }

    #[test]
    fn metric_axioms_on_weighted_line() {
        let space = ConeMetricSpace::exp_weighted_line(33).unwrap();
        let r = verify_metric_axioms(&space, 1000, 42).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(space.weight_is_admissible());
    }

    #[test]
    fn sign_changing_weight_breaks_d1() {
        let cone = ConeSpec::new(33, ConeKind::Orthant, 1e-12, 1.0).unwrap();
        let space = ConeMetricSpace::new(1, cone, "t - 0.5", BaseDistance::AbsoluteDifference).unwrap();
        assert!(!space.weight_is_admissible());
        let r = verify_metric_axioms(&space, 200, 1).unwrap();
        assert!(!r.outcome("d1").unwrap().passed());
    }

    #[test]
    fn euclidean_plane() {
        let space = ConeMetricSpace::new(2, ConeSpec::orthant(5).unwrap(), "1 + t^2", BaseDistance::Euclidean).unwrap();
        let d = space.distance_norm(&MPoint::new(vec![0.0, 0.0]).unwrap(), &MPoint::new(vec![3.0, 4.0]).unwrap());
        assert_eq!(d.unwrap(), 10.0);
        assert!(verify_metric_axioms(&space, 500, 3).unwrap().passed());
    }

    #[test]
    fn convergence_examples() {
        let space = ConeMetricSpace::exp_weighted_line(33).unwrap();
        let halving: Vec<MPoint> = (0..40).map(|n| p(0.5f64.powi(n))).collect();
        assert!(sequence_converges(&space, &halving, &p(0.0), 1e-6).unwrap());
        let constant = vec![p(3.0); 10];
        assert!(sequence_converges(&space, &constant, &p(3.0), 1e-300).unwrap());
        let alternating: Vec<MPoint> = (0..40).map(|n| p(if n % 2 == 0 { 1.0 } else { -1.0 })).collect();
        assert!(!sequence_converges(&space, &alternating, &p(0.0), 1e-6).unwrap());
        assert!(sequence_converges(&space, &[], &p(0.0), 1e-6).is_err());
        assert!(sequence_converges(&space, &constant, &p(0.0), 0.0).is_err());
    }

    #[test]
    fn cauchy_examples() {
        let space = ConeMetricSpace::exp_weighted_line(33).unwrap();
        let halving: Vec<MPoint> = (0..40).map(|n| p(0.5f64.powi(n))).collect();
        assert!(is_cauchy(&space, &halving, 1e-6).unwrap());
        let alternating: Vec<MPoint> = (0..40).map(|n| p(if n % 2 == 0 { 1.0 } else { -1.0 })).collect();
        assert!(!is_cauchy(&space, &alternating, 1.0).unwrap());
        assert!(is_cauchy(&space, &[p(2.0), p(2.0)], 1e-12).unwrap());
        assert!(is_cauchy(&space, &[p(2.0)], 1e-12).is_err());
    }

    #[test]
    fn tail_window() {
        assert_eq!(tail_len(3), 3);
        assert_eq!(tail_len(10), 5);
        assert_eq!(tail_len(40), 10);
    }
}
