//! Reductions of the T-contraction setting and bundled problem fixtures.
//!
//! Taking `T` as the identity turns TK1/TK2 into the classical Kannan and
//! Chatterjea conditions; taking `E = R` with the weight `1` turns the cone
//! metric into an ordinary metric. Both reductions are available here as
//! ready-made problems.

use crate::cone_metric::{BaseDistance, ConeMetricSpace, MPoint};
use crate::contraction::ContractionKind;
use crate::error::Result;
use crate::maps::{parse_map, DomainBox, MapCapabilities, MapExpr};
use crate::solver::Problem;

/// Kannan problem: `d(Sx, Sy) <= b [d(x, Sx) + d(y, Sy)]`, `T` the identity.
pub fn kannan(space: ConeMetricSpace, s_map: MapExpr, b: f64, x0: MPoint, domain: DomainBox) -> Problem {
    let k = space.point_dimension();
    Problem {
        space,
        t_map: MapExpr::identity(k),
        capabilities: MapCapabilities::all(),
        s_map,
        kind: ContractionKind::K1,
        constant: b,
        x0,
        domain,
    }
}

/// Chatterjea problem: `d(Sx, Sy) <= c [d(x, Sy) + d(y, Sx)]`, `T` the identity.
pub fn chatterjea(space: ConeMetricSpace, s_map: MapExpr, c: f64, x0: MPoint, domain: DomainBox) -> Problem {
    Problem {
        kind: ContractionKind::K2,
        ..kannan(space, s_map, c, x0, domain)
    }
}

/// `R^k` with its ordinary metric as a cone metric space over `E = R`.
pub fn metric_line(point_dimension: usize) -> Result<ConeMetricSpace> {
    ConeMetricSpace::standard(point_dimension, BaseDistance::AbsoluteDifference)
}

/// `T x = x^2`, `S x = x / 2` on `[-10, 10]` with `d(x, y) = |x - y| e^t` on
/// a 33-point grid.
pub fn square_half(kind: ContractionKind, constant: f64, x0: f64) -> Result<Problem> {
    Ok(Problem {
        space: ConeMetricSpace::exp_weighted_line(33)?,
        t_map: parse_map("x^2")?,
        capabilities: MapCapabilities {
            injective: false,
            continuous: true,
            subsequentially_convergent: true,
            sequentially_convergent: false,
        },
        s_map: parse_map("x/2")?,
        kind,
        constant,
        x0: MPoint::scalar(x0)?,
        domain: DomainBox::interval(-10.0, 10.0)?,
    })
}

/// Bundled problem files, by name.
pub const BUILTINS: &[(&str, &str)] = &[
    ("square_half_kannan", include_str!("../fixtures/square_half_kannan.json")),
    ("square_half_chatterjea", include_str!("../fixtures/square_half_chatterjea.json")),
    ("square_half_unit_interval", include_str!("../fixtures/square_half_unit_interval.json")),
    ("kannan_x_over_5", include_str!("../fixtures/kannan_x_over_5.json")),
    ("constant_map", include_str!("../fixtures/constant_map.json")),
    ("corrupted_cone", include_str!("../fixtures/corrupted_cone.json")),
    ("sign_changing_weight", include_str!("../fixtures/sign_changing_weight.json")),
];

/// Fixtures expected to pass every check.
pub const PASSING_BUILTINS: &[&str] = &[
    "square_half_kannan",
    "square_half_chatterjea",
    "square_half_unit_interval",
    "kannan_x_over_5",
    "constant_map",
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, src)| *src)
}
