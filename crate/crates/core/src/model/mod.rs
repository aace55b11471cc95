//! Parameters, dispersive shifts, schedules and Hamiltonians.

mod hamiltonian;
mod params;
mod schedule;
mod shifts;

pub use hamiltonian::{
    block_coefficients, block_hamiltonian, crosstalk_hamiltonian, effective_hamiltonian,
    effective_hamiltonian_for, full_hamiltonian, total_photon_number, AsymmetryPolicy,
    RotatingTerm, TimeDependentHamiltonian,
};
pub use params::{ModelParams, UnitConvention};
pub use schedule::{
    consistent_detuning_ratios, detuning_ratio, protocol_time, rate_over_abs_chi,
    timing_identities, FeBranch, Scheme, TimingIdentities, TimingPolicy, Variant, TIMING_RTOL,
};
pub use shifts::DispersiveShifts;
