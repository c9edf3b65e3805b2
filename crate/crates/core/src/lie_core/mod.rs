//! Lie group and Lie algebra arithmetic.

mod algebra;
mod chart;
mod group;

pub use algebra::{AlgebraKind, AlgebraVector, DualVector, StructureConstants};
pub use chart::{Chart, ChartPoint};
pub use group::{GroupElement, LieGroup};
