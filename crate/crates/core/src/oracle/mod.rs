//! Closed-form references: the abstract adder, beam-splitter mode mixing and
//! exact phase bookkeeping at the scheduled times.

mod adder;
mod mixing;
mod phase;

pub use adder::{
    abstract_adder, exact_target, nominal_sign, parity, scheme_adder, superpose_branches,
    AdderOutput, Sign, TargetConvention, MIN_NORM_SQ,
};
pub use mixing::{beam_splitter_mix, coherent_bs_evolve, mix_two_mode, ModeMixMatrix, SignConvention};
pub use phase::{
    conditional_phase, conditional_phase_at, even_photon_number, relative_phase, BranchMap,
    ExactPhase,
};
