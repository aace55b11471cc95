//! Closed and open time evolution.

mod integrator;
mod lindblad;
mod noise;
mod unitary;

pub use integrator::{
    integrate, Integration, IntegrationStats, IntegratorSpec, Method, OdeSystem,
};
pub use lindblad::{
    dissipator, evolve_master, lindblad_rhs, lindblad_rhs_at, Diagnostics, MasterEquation,
    MasterEvolution, HERMITICITY_TOL, MIN_EIGENVALUE_TOL, TRACE_TOL,
};
pub use noise::{Channel, NoiseSpec};
pub use unitary::{evolve_exact, evolve_unitary, evolve_unitary_with_stats, propagator, NORM_TOL};
