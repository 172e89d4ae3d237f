//! Certified fixed-point iteration for T-Kannan and T-Chatterjea contractions
//! on cone metric spaces.
//!
//! The crate is layered bottom-up:
//!
//! * [`ordered_space`]: the discretized ordered Banach space `E`, the cone `P`,
//!   the induced order and normality fuzzers.
//! * [`cone_metric`]: cone metric spaces `d(x, y) = ρ(x, y) · w` and the
//!   norm-level sequence tests.
//! * [`maps`]: the expression grammar for the self-maps `T` and `S`, their
//!   declared capabilities, and the injectivity spot check.
//! * [`contraction`]: sampled TK1/TK2 checks and minimal-constant estimates.
//! * [`solver`]: Picard iteration with a priori and a posteriori certificates
//!   and a uniqueness probe.
//! * [`harness`]: problem files, run reports and subcommand dispatch used by
//!   the `conefix` binary.
//!
//! [`presets`] collects the reductions to `T = identity` and to ordinary
//! metric spaces, plus the bundled fixtures.

pub mod cone_metric;
pub mod contraction;
pub mod error;
pub mod harness;
pub mod maps;
pub mod ordered_space;
pub mod presets;
pub mod sampling;
pub mod solver;

pub use cone_metric::{BaseDistance, ConeMetricSpace, MPoint};
pub use contraction::{ConstantEstimate, ContractionKind, ContractionReport};
pub use error::{Error, Result};
pub use maps::{parse_map, DomainBox, MapCapabilities, MapExpr};
pub use ordered_space::{ConeKind, ConeSpec, EVector};
pub use solver::{solve, Certificate, FixedPointResult, Problem};
