use serde::{Deserialize, Serialize};

use super::params::ModelParams;
use crate::error::{Error, Result};

/// Dispersive shifts `χ = g²/Δ`, `λ = 2g²/(Δ-α)`, `Λ = χ - λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersiveShifts {
    pub chi: f64,
    pub lam: f64,
    pub big_lam: f64,
}

impl DispersiveShifts {
    pub fn new(g: f64, delta: f64, anharm: f64) -> Result<Self> {
        let small = delta - anharm;
        if delta == 0.0 || small == 0.0 {
            return Err(Error::Resonance { delta, anharm });
        }
        let chi = g * g / delta;
        let lam = 2.0 * g * g / small;
        Ok(DispersiveShifts {
            chi,
            lam,
            big_lam: chi - lam,
        })
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        Self::new(params.g, params.delta, params.anharm)
    }
}
