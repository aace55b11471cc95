//! Qutrit and truncated-Fock operator algebra on `qutrit ⊗ A ⊗ B`.

mod layout;
mod operator;
mod sparse;
mod state;

pub use layout::{Level, Slot, SpaceLayout};
pub use operator::{annihilation, number, projector, qutrit_transition, CMatrix, Operator};
pub use sparse::{from_row_major, hermitian_fold, to_row_major, Monomial, SparseMatrix};
pub use state::{
    coherent_state, coherent_state_with_tolerance, coherent_tail, fidelity, fock_state,
    min_eigenvalue, partial_trace, qutrit_state, CVector, QuantumState, ReducedState, StateRepr,
    DEFAULT_TAIL_TOLERANCE, POSITIVITY_SLACK,
};
pub(crate) use operator::hermiticity_deficit;
