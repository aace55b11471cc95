use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How quoted "MHz" figures map onto angular frequencies in rad/µs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitConvention {
    /// Quoted values already are angular frequencies.
    Angular,
    /// Quoted values are cyclic frequencies, multiplied by 2π internally.
    #[default]
    Cyclic,
}

impl UnitConvention {
    pub const ALL: [UnitConvention; 2] = [UnitConvention::Cyclic, UnitConvention::Angular];

    pub fn factor(self) -> f64 {
        match self {
            UnitConvention::Angular => 1.0,
            UnitConvention::Cyclic => TAU,
        }
    }

    /// Converts a quoted frequency (MHz) into rad/µs.
    pub fn to_angular(self, quoted: f64) -> f64 {
        quoted * self.factor()
    }

    pub fn name(self) -> &'static str {
        match self {
            UnitConvention::Angular => "angular",
            UnitConvention::Cyclic => "cyclic",
        }
    }
}

impl fmt::Display for UnitConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UnitConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angular" => Ok(UnitConvention::Angular),
            "cyclic" => Ok(UnitConvention::Cyclic),
            other => Err(Error::Config(format!(
                "unknown unit convention '{other}' (expected angular or cyclic)"
            ))),
        }
    }
}

/// Physical parameters. Frequencies are angular (rad/µs), rates are 1/µs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g: f64,
    /// `g_B = c * g`.
    pub coupling_asymmetry: f64,
    /// `Δ = ω_eg - ω_cavity`, signed.
    pub delta: f64,
    /// `α = ω_eg - ω_fe > 0`.
    pub anharm: f64,
    pub g_ab: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub gamma_eg: f64,
    pub gamma_fe: f64,
    pub gamma_fg: f64,
    pub gamma_phi_e: f64,
    pub gamma_phi_f: f64,
    pub unit_convention: UnitConvention,
}

impl ModelParams {
    /// Noiseless, crosstalk-free parameters with `g = sqrt(|χ Δ|)`.
    ///
    /// `chi` and `anharm` are quoted in MHz and converted with `convention`;
    /// `delta_ratio` is `Δ / α`.
    pub fn from_dispersive(
        chi: f64,
        anharm: f64,
        delta_ratio: f64,
        convention: UnitConvention,
    ) -> Result<Self> {
        let anharm = convention.to_angular(anharm);
        let chi = convention.to_angular(chi);
        let delta = delta_ratio * anharm;
        let params = ModelParams {
            g: (chi * delta).abs().sqrt(),
            coupling_asymmetry: 1.0,
            delta,
            anharm,
            g_ab: 0.0,
            kappa_a: 0.0,
            kappa_b: 0.0,
            gamma_eg: 0.0,
            gamma_fe: 0.0,
            gamma_fg: 0.0,
            gamma_phi_e: 0.0,
            gamma_phi_f: 0.0,
            unit_convention: convention,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn g_a(&self) -> f64 {
        self.g
    }

    pub fn g_b(&self) -> f64 {
        self.coupling_asymmetry * self.g
    }

    /// `δ = Δ - α`.
    pub fn small_delta(&self) -> f64 {
        self.delta - self.anharm
    }

    pub fn is_noiseless(&self) -> bool {
        [
            self.kappa_a,
            self.kappa_b,
            self.gamma_eg,
            self.gamma_fe,
            self.gamma_fg,
            self.gamma_phi_e,
            self.gamma_phi_f,
        ]
        .iter()
        .all(|r| *r == 0.0)
    }

    pub fn without_noise(&self) -> Self {
        ModelParams {
            kappa_a: 0.0,
            kappa_b: 0.0,
            gamma_eg: 0.0,
            gamma_fe: 0.0,
            gamma_fg: 0.0,
            gamma_phi_e: 0.0,
            gamma_phi_f: 0.0,
            ..self.clone()
        }
    }

    /// Hard checks. Returns soft warnings (large-detuning regime) on success.
    pub fn validate(&self) -> Result<Vec<String>> {
        let finite = [
            ("g", self.g),
            ("coupling_asymmetry", self.coupling_asymmetry),
            ("delta", self.delta),
            ("anharm", self.anharm),
            ("g_ab", self.g_ab),
            ("kappa_a", self.kappa_a),
            ("kappa_b", self.kappa_b),
            ("gamma_eg", self.gamma_eg),
            ("gamma_fe", self.gamma_fe),
            ("gamma_fg", self.gamma_fg),
            ("gamma_phi_e", self.gamma_phi_e),
            ("gamma_phi_f", self.gamma_phi_f),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        if self.anharm <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "anharmonicity must be positive, got {}",
                self.anharm
            )));
        }
        if self.delta.abs() <= self.anharm {
            return Err(Error::RegimeViolation {
                ratio: format!("{}", self.delta / self.anharm),
            });
        }
        for (name, v) in &finite[4..] {
            if *v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be >= 0")));
            }
        }
        if self.g < 0.0 || self.coupling_asymmetry < 0.0 {
            return Err(Error::InvalidParameter(
                "couplings must be non-negative".into(),
            ));
        }
        let mut warnings = Vec::new();
        let g_max = self.g.max(self.g_b());
        if self.delta.abs() < 10.0 * g_max {
            warnings.push(format!(
                "|delta| = {:.4} < 10 g = {:.4}: outside the large-detuning regime",
                self.delta.abs(),
                10.0 * g_max
            ));
        }
        if self.small_delta().abs() < 10.0 * 2f64.sqrt() * g_max {
            warnings.push(format!(
                "|delta - anharm| = {:.4} < 10 sqrt(2) g = {:.4}: outside the large-detuning regime",
                self.small_delta().abs(),
                10.0 * 2f64.sqrt() * g_max
            ));
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn coupling_from_dispersive_shift() {
        let p = ModelParams::from_dispersive(1.0, 115.0, 6.0, UnitConvention::Angular).unwrap();
        assert_relative_eq!(p.g, 690f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(p.g, 26.268, epsilon = 1e-3);
        let p = ModelParams::from_dispersive(1.0, 115.0, 6.0, UnitConvention::Cyclic).unwrap();
        assert_relative_eq!(p.g, TAU * 690f64.sqrt(), epsilon = 1e-10);
        assert_relative_eq!(p.delta, TAU * 690.0, epsilon = 1e-10);
        assert!(p.validate().unwrap().is_empty());
    }

    #[test]
    fn regime_and_sign_checks() {
        assert!(matches!(
            ModelParams::from_dispersive(1.0, 115.0, 0.5, UnitConvention::Cyclic),
            Err(Error::RegimeViolation { .. })
        ));
        let mut p = ModelParams::from_dispersive(1.0, 115.0, -9.0, UnitConvention::Cyclic).unwrap();
        p.kappa_a = -1.0;
        assert!(p.validate().is_err());
        p.kappa_a = 0.0;
        assert!(p.validate().unwrap().is_empty());
        p.g = 700.0;
        assert_eq!(p.validate().unwrap().len(), 2);
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("cyclic".parse::<UnitConvention>().unwrap(), UnitConvention::Cyclic);
        assert_eq!("angular".parse::<UnitConvention>().unwrap(), UnitConvention::Angular);
        assert!("hertz".parse::<UnitConvention>().is_err());
    }
}
