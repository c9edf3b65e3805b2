//! Hamiltonians, equations of motion for the five flow families, a fixed-step
//! integrator and conservation monitors.

mod flow;
mod hamiltonian;
mod integrate;

pub use flow::{FlowMode, FlowState, StateRate, System};
pub use hamiltonian::{body_force, kinetic, kinetic_grad, potential, potential_grad_left, InertiaTensor, PotentialSpec};
pub use integrate::{DegeneracyEvent, Halt, IntegratorConfig, MonitorChannel, Trajectory};
