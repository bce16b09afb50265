//! Master-equation generator, time evolution and stationary states.

mod evolve;
mod generator;
pub mod ode;
mod state;
mod steady;
mod truncation;

pub use evolve::{evolve, uniform_grid, EvolveOptions, Trajectory, TRAJECTORY_TRACE_TOL};
pub use generator::{
    build_hamiltonian, build_liouvillian, build_system, Hamiltonian, Liouvillian, Modulation, PeriodicTerm,
};
pub use ode::OdeOptions;
pub use state::{right_multiply, DensityMatrix};
pub use steady::{steady_state, STEADY_RESIDUAL_TOL};
pub use truncation::{converge_truncation, TruncationOptions, TruncationReport};
