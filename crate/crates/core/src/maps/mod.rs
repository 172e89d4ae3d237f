//! Self-maps `T` and `S` of `M`: parsing, evaluation, declared capabilities,
//! and sampled injectivity checks.

mod expr;
mod parse;

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

pub use expr::{Env, Expr, DIVISION_GUARD};
pub use parse::{parse_components, parse_expr, Symbols};

use crate::cone_metric::MPoint;
use crate::error::{invalid, Error, Result};
use crate::sampling;

/// Tolerances for the injectivity spot check.
pub const COLLISION_VALUE_TOL: f64 = 1e-12;
pub const COLLISION_SEPARATION: f64 = 1e-9;

/// A componentwise self-map of `R^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExpr {
    source: String,
    components: Vec<Expr>,
}

impl MapExpr {
    pub fn from_components(components: Vec<Expr>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("components", "a map needs at least one component"));
        }
        let dim = components.len();
        if let Some(c) = components.iter().find(|c| c.arity() > dim || c.uses_t()) {
            return Err(invalid(
                "components",
                format!("component `{c}` refers to symbols outside x0..x{}", dim - 1),
            ));
        }
        let source = components
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        Ok(Self { source, components })
    }

    pub fn identity(dimension: usize) -> Self {
        Self::catalog(Catalog::Identity, dimension)
    }

    pub fn catalog(entry: Catalog, dimension: usize) -> Self {
        let components = (0..dimension.max(1)).map(|i| entry.component(i)).collect();
        Self::from_components(components).expect("catalog maps are well formed")
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, p: &MPoint) -> Result<MPoint> {
        if p.dimension() != self.dimension() {
            return Err(Error::ArityMismatch {
                arity: self.dimension(),
                dimension: p.dimension(),
            });
        }
        let env = Env {
            point: p.coords(),
            t: 0.0,
        };
        let coords = self
            .components
            .iter()
            .map(|c| c.eval(&env))
            .collect::<Result<Vec<_>>>()?;
        MPoint::new(coords)
    }

    /// Reparseable, fully parenthesized form.
    pub fn printed(&self) -> String {
        self.components
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for MapExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Serialize for MapExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.source)
    }
}

/// Named maps, applied to the coordinate of the component they occupy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Catalog {
    Identity,
    Square,
    Half,
    Scale(f64),
    Constant(f64),
}

impl Catalog {
    fn component(self, i: usize) -> Expr {
        let x = Box::new(Expr::Var(i));
        match self {
            Catalog::Identity => Expr::Var(i),
            Catalog::Square => Expr::Pow(x, 2),
            Catalog::Half => Expr::Div(x, Box::new(Expr::Const(2.0))),
            Catalog::Scale(a) => Expr::Mul(Box::new(Expr::Const(a)), x),
            Catalog::Constant(c) => Expr::Const(c),
        }
    }
}

/// Parse a map; its dimension is the number of `;`-separated components.
pub fn parse_map(source: &str) -> Result<MapExpr> {
    let dim = source.matches(';').count() + 1;
    let components = parse_components(
        source,
        Symbols {
            point_dimension: dim,
            allow_t: false,
        },
    )?;
    Ok(MapExpr {
        source: source.trim().to_string(),
        components,
    })
}

/// Parse a map that must act on `dimension`-dimensional points.
pub fn parse_map_for(source: &str, dimension: usize) -> Result<MapExpr> {
    let map = parse_map(source)?;
    if map.dimension() != dimension {
        return Err(Error::ArityMismatch {
            arity: map.dimension(),
            dimension,
        });
    }
    Ok(map)
}

pub fn eval_map(expr: &MapExpr, p: &MPoint) -> Result<MPoint> {
    expr.eval(p)
}

/// Analytic properties of `T`, declared by the user. They are hypotheses of
/// the fixed-point theorems and cannot be decided by finite computation;
/// only injectivity is refutable by sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MapCapabilities {
    #[serde(default)]
    pub injective: bool,
    #[serde(default)]
    pub continuous: bool,
    #[serde(default)]
    pub subsequentially_convergent: bool,
    #[serde(default)]
    pub sequentially_convergent: bool,
}

impl MapCapabilities {
    /// Everything declared, as for a homeomorphism such as the identity.
    pub fn all() -> Self {
        Self {
            injective: true,
            continuous: true,
            subsequentially_convergent: true,
            sequentially_convergent: true,
        }
    }

    /// Sequential convergence implies subsequential convergence, so a
    /// declaration claiming the former without the latter is inconsistent.
    pub fn validate(&self) -> Result<()> {
        if self.sequentially_convergent && !self.subsequentially_convergent {
            return Err(invalid(
                "capabilities",
                "sequentially_convergent requires subsequentially_convergent",
            ));
        }
        Ok(())
    }

    /// Names of theorem hypotheses that were not declared.
    pub fn missing_hypotheses(&self) -> Vec<&'static str> {
        let mut missing = Vec::new();
        if !self.injective {
            missing.push("injective");
        }
        if !self.continuous {
            missing.push("continuous");
        }
        if !self.subsequentially_convergent {
            missing.push("subsequentially_convergent");
        }
        missing
    }
}

/// Axis-aligned box of closed intervals, one per point coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DomainBox {
    intervals: Vec<(f64, f64)>,
}

impl DomainBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(invalid("domain", "needs at least one interval"));
        }
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(invalid("domain", format!("bad interval [{lo}, {hi}]")));
            }
        }
        Ok(Self { intervals })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi)])
    }

    pub fn dimension(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.intervals.len()
            && p.iter()
                .zip(&self.intervals)
                .all(|(&v, &(lo, hi))| lo <= v && v <= hi)
    }
}

impl TryFrom<Vec<(f64, f64)>> for DomainBox {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DomainBox> for Vec<(f64, f64)> {
    fn from(d: DomainBox) -> Self {
        d.intervals
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub samples: usize,
    /// A pair `x != y` with `T(x) ≈ T(y)`, refuting injectivity.
    pub collision: Option<(Vec<f64>, Vec<f64>)>,
}

impl InjectivityReport {
    pub fn refuted(&self) -> bool {
        self.collision.is_some()
    }
}

/// Search sampled points for a collision `|T(x) - T(y)| <= 1e-12` with
/// `|x - y| > 1e-9` (sup norms). Half of the samples lie on a regular grid
/// (a Halton design above one dimension), the rest are seeded uniform.
pub fn spot_check_injective(
    expr: &MapExpr,
    samples: usize,
    domain: &DomainBox,
    seed: u64,
) -> Result<InjectivityReport> {
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 samples"));
    }
    if domain.dimension() != expr.dimension() {
        return Err(Error::ArityMismatch {
            arity: expr.dimension(),
            dimension: domain.dimension(),
        });
    }
    let k = domain.dimension();
    let grid_count = samples / 2;
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(samples);
    if k == 1 {
        let (lo, hi) = domain.intervals()[0];
        points.extend(sampling::grid_1d(lo, hi, grid_count.max(1)).into_iter().map(|v| vec![v]));
    } else {
        for i in 0..grid_count as u64 {
            let u = sampling::halton(i, k.min(16));
            points.push(
                domain
                    .intervals()
                    .iter()
                    .enumerate()
                    .map(|(j, &(lo, hi))| lo + (hi - lo) * u.get(j).copied().unwrap_or(0.5))
                    .collect(),
            );
        }
    }
    let mut rng = sampling::rng(seed);
    while points.len() < samples {
        points.push(sampling::uniform_in(&mut rng, domain));
    }

    let mut images = Vec::with_capacity(points.len());
    for p in points {
        let image = expr.eval(&MPoint::new(p.clone())?)?;
        images.push((p, image.into_coords()));
    }
    images.sort_by(|a, b| a.1[0].total_cmp(&b.1[0]));

    let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if images[j].1[0] - images[i].1[0] > COLLISION_VALUE_TOL {
                break;
            }
            if sup(&images[i].1, &images[j].1) <= COLLISION_VALUE_TOL
                && sup(&images[i].0, &images[j].0) > COLLISION_SEPARATION
            {
                return Ok(InjectivityReport {
                    samples,
                    collision: Some((images[i].0.clone(), images[j].0.clone())),
                });
            }
        }
    }
    Ok(InjectivityReport {
        samples,
        collision: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64) -> MPoint {
        MPoint::scalar(x).unwrap()
    }

    #[test]
    fn eval_examples() {
        let sq = MapExpr::catalog(Catalog::Square, 1);
        assert_eq!(sq.eval(&p(3.0)).unwrap(), p(9.0));
        let half = MapExpr::catalog(Catalog::Half, 1);
        assert_eq!(half.eval(&p(1.0)).unwrap(), p(0.5));
        let inv = parse_map("1/x").unwrap();
        assert!(matches!(inv.eval(&p(0.0)), Err(Error::DivisionGuard { .. })));
        assert!(matches!(parse_map("x^-1").unwrap().eval(&p(0.0)), Err(Error::DivisionGuard { .. })));
        assert_eq!(parse_map("exp(x)").unwrap().eval(&p(1000.0)), Err(Error::NonFiniteValue));
    }

    #[test]
    fn arity_is_checked() {
        let sq = parse_map("x^2").unwrap();
        let two = MPoint::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(sq.eval(&two), Err(Error::ArityMismatch { .. })));
        let swap = parse_map("x1; x0").unwrap();
        assert_eq!(swap.eval(&two).unwrap().coords(), &[2.0, 1.0]);
        assert!(parse_map_for("x^2", 2).is_err());
    }

    #[test]
    fn catalog_matches_parsed() {
        assert_eq!(MapExpr::catalog(Catalog::Square, 1).components(), parse_map("x^2").unwrap().components());
        assert_eq!(MapExpr::catalog(Catalog::Half, 1).components(), parse_map("x/2").unwrap().components());
    }

    #[test]
    fn injectivity_examples() {
        let sq = parse_map("x^2").unwrap();
        let unit = DomainBox::interval(0.0, 1.0).unwrap();
        assert!(!spot_check_injective(&sq, 2000, &unit, 42).unwrap().refuted());
        let sym = DomainBox::interval(-1.0, 1.0).unwrap();
        let r = spot_check_injective(&sq, 2000, &sym, 42).unwrap();
        let (x, y) = r.collision.unwrap();
        assert!((x[0] + y[0]).abs() < 1e-9);
        let id = MapExpr::identity(1);
        assert!(!spot_check_injective(&id, 2000, &sym, 42).unwrap().refuted());
        assert!(spot_check_injective(&id, 1, &sym, 42).is_err());
    }

    #[test]
    fn capabilities_consistency() {
        let bad = MapCapabilities {
            sequentially_convergent: true,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(MapCapabilities::all().validate().is_ok());
        assert!(MapCapabilities::all().missing_hypotheses().is_empty());
    }

    #[test]
    fn domain_box_validation() {
        assert!(DomainBox::new(vec![]).is_err());
        assert!(DomainBox::interval(1.0, 0.0).is_err());
        let d: DomainBox = serde_json::from_str("[[-10, 10]]").unwrap();
        assert!(d.contains(&[0.0]));
        assert!(!d.contains(&[11.0]));
    }
}
