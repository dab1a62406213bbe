//! The geometric scene: a fixed embedded manifold `M`, an evolving open set
//! `O_t ⊂ M` described by a boundary immersion, and scalar fields on `M`.

mod chart;
mod evolving;
mod field;
mod immersion;
mod validate;

pub use chart::{ManifoldChart, MatMap, ParamBox, VecMap};
pub use evolving::{
    BulkPiece, EvolvingDomain, ExceptionalPoints, Membership, TimeMatMap, TimeVecMap, Tolerances,
};
pub use field::{FieldFn, GradientFn, ScalarField};
pub use immersion::{BoundaryImmersion, ChartedMatMap, ChartedVecMap};
pub use validate::{
    detect_self_intersections, validate_field, validate_scene, CheckResult, ValidationReport,
};
