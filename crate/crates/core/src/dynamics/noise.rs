use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::tensor::{Level, Operator, SpaceLayout};

/// The seven dissipation channels of the master equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// `√κ_A a`
    CavityA,
    /// `√κ_B b`
    CavityB,
    /// `√γ_eg |g><e|`
    RelaxEG,
    /// `√γ_fe |e><f|`
    RelaxFE,
    /// `√γ_fg |g><f|`
    RelaxFG,
    /// `√γ_φe |e><e|`
    DephaseE,
    /// `√γ_φf |f><f|`
    DephaseF,
}

impl Channel {
    pub const ALL: [Channel; 7] = [
        Channel::CavityA,
        Channel::CavityB,
        Channel::RelaxEG,
        Channel::RelaxFE,
        Channel::RelaxFG,
        Channel::DephaseE,
        Channel::DephaseF,
    ];

    fn slot(self) -> usize {
        Channel::ALL.iter().position(|c| *c == self).expect("listed")
    }

    /// Unscaled collapse operator.
    pub fn operator(self, layout: SpaceLayout) -> Operator {
        match self {
            Channel::CavityA => Operator::cavity_a(layout),
            Channel::CavityB => Operator::cavity_b(layout),
            Channel::RelaxEG => Operator::qutrit(Level::E, Level::G, layout),
            Channel::RelaxFE => Operator::qutrit(Level::F, Level::E, layout),
            Channel::RelaxFG => Operator::qutrit(Level::F, Level::G, layout),
            Channel::DephaseE => Operator::qutrit(Level::E, Level::E, layout),
            Channel::DephaseF => Operator::qutrit(Level::F, Level::F, layout),
        }
    }
}

/// Rates (1/µs) of the seven channels; a zero rate disables a channel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    rates: [f64; 7],
}

impl NoiseSpec {
    pub fn none() -> Self {
        NoiseSpec::default()
    }

    pub fn from_params(params: &ModelParams) -> Self {
        NoiseSpec {
            rates: [
                params.kappa_a,
                params.kappa_b,
                params.gamma_eg,
                params.gamma_fe,
                params.gamma_fg,
                params.gamma_phi_e,
                params.gamma_phi_f,
            ],
        }
    }

    pub fn rate(&self, channel: Channel) -> f64 {
        self.rates[channel.slot()]
    }

    pub fn with_rate(mut self, channel: Channel, rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rate of {channel:?} must be finite and >= 0, got {rate}"
            )));
        }
        self.rates[channel.slot()] = rate;
        Ok(self)
    }

    pub fn without(mut self, channel: Channel) -> Self {
        self.rates[channel.slot()] = 0.0;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.rates.iter().all(|r| *r == 0.0)
    }

    /// `√rate · O` for every enabled channel.
    pub fn collapse_operators(&self, layout: SpaceLayout) -> Vec<(Channel, Operator)> {
        Channel::ALL
            .iter()
            .filter(|c| self.rate(**c) > 0.0)
            .map(|c| (*c, c.operator(layout).scale_real(self.rate(*c).sqrt())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UnitConvention;

    #[test]
    fn rates_follow_params() {
        let mut p = ModelParams::from_dispersive(1.0, 115.0, 6.0, UnitConvention::Cyclic).unwrap();
        p.kappa_b = 0.1;
        p.gamma_phi_f = 0.2;
        let n = NoiseSpec::from_params(&p);
        assert_eq!(n.rate(Channel::CavityB), 0.1);
        assert_eq!(n.rate(Channel::DephaseF), 0.2);
        assert_eq!(n.rate(Channel::RelaxFG), 0.0);
        let layout = SpaceLayout::symmetric(2).unwrap();
        let ops = n.collapse_operators(layout);
        assert_eq!(ops.len(), 2);
        assert!(n.without(Channel::CavityB).without(Channel::DephaseF).is_empty());
        assert!(n.with_rate(Channel::RelaxEG, -1.0).is_err());
    }
}
