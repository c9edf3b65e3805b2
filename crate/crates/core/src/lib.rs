//! Hamiltonian mechanics on the cotangent bundle of a Lie group.
//!
//! Phase space is `T*(G) ≅ G × 𝒢*` in body coordinates `(g, π^L)`. Three
//! closed two-forms are supported: the canonical form, the form twisted by a
//! constant two-cocycle `Θ`, and the form further extended by a constant
//! bivector `Υ` in the momentum differentials, which makes the group
//! coordinates Poisson-noncommuting. The last one degenerates on the zero set
//! of `Δ = det Φ`; for SU(2) the [`gnh`] module runs the presymplectic
//! constraint algorithm on that stratum.
//!
//! All numerical types are generic over [`Real`] (`f32` or `f64`); `f64`
//! aliases are exported at the crate root.

pub mod cocycle;
pub mod dynamics;
mod error;
pub mod gnh;
pub mod lie_core;
mod linalg;
pub mod observables;
mod scalar;
pub mod symplectic;

pub use error::{Error, Result};
pub use scalar::Real;

pub use lie_core::{AlgebraKind, AlgebraVector, Chart, ChartPoint, DualVector, GroupElement, LieGroup, StructureConstants};

pub type Algebra64 = StructureConstants<f64>;
pub type Group64 = LieGroup<f64>;
pub type GroupElement64 = GroupElement<f64>;
pub type AlgebraVector64 = AlgebraVector<f64>;
pub type DualVector64 = DualVector<f64>;
pub type PhasePoint64 = symplectic::PhasePoint<f64>;
pub type StructureSelector64 = symplectic::StructureSelector<f64>;
pub type System64 = dynamics::System<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type PhasePoint32 = symplectic::PhasePoint<f32>;
pub type System32 = dynamics::System<f32>;
