use thiserror::Error;

use crate::tensor::SpaceLayout;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("layout mismatch: {left} vs {right}")]
    LayoutMismatch { left: SpaceLayout, right: SpaceLayout },

    #[error(
        "truncation {dim} too small for coherent amplitude |alpha| = {amplitude}: \
         tail {tail:e} exceeds tolerance, need at least {minimal_dim} levels"
    )]
    TruncationTooSmall {
        amplitude: f64,
        dim: usize,
        minimal_dim: usize,
        tail: f64,
    },

    #[error("numerical positivity violated: <psi|rho|psi> = {0:e}")]
    Positivity(f64),

    #[error("partial trace needs a non-empty set of kept factors")]
    EmptyKeepSet,

    #[error("resonant detuning: delta = {delta}, anharmonicity = {anharm}")]
    Resonance { delta: f64, anharm: f64 },

    #[error("invalid schedule {scheme} (k1 = {k1}, k2 = {k2}): zero denominator")]
    InvalidSchedule { scheme: String, k1: u32, k2: u32 },

    #[error("detuning ratio {ratio} violates |delta| > anharmonicity")]
    RegimeViolation { ratio: String },

    #[error("schedule inconsistency: {0}")]
    ScheduleInconsistency(String),

    #[error("effective Hamiltonian requires symmetric couplings (coupling asymmetry c = {0})")]
    AsymmetricCoupling(f64),

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("measurement branch has probability {0:e}")]
    EmptyBranch(f64),

    #[error("destructive interference: N^2 = {0:e}")]
    DestructiveInterference(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
