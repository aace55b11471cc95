//! Flat TOML run files. Every key is optional and overrides the base scenario.
//!
//! ```toml
//! base = "fig4a"            # built-in scenario to start from
//! id = "fig4a-coarse"
//! theta_steps = 16
//! k = [10.0]
//! unit_convention = "angular"
//! ```

use std::path::Path;

use serde::Deserialize;

use super::scenario::{scenario, Grid, Scenario};
use crate::dynamics::Method;
use crate::error::{Error, Result};
use crate::model::{FeBranch, Scheme, TimingPolicy, UnitConvention, Variant};
use crate::oracle::{Sign, TargetConvention};
use crate::protocol::HamiltonianPath;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub base: Option<String>,
    pub id: Option<String>,
    /// Short (`eg`, `ef`, `fg`, `fe`) or long variant name.
    pub scheme: Option<String>,
    pub k1: Option<u32>,
    pub k2: Option<u32>,
    pub fe_branch: Option<FeBranch>,
    pub detuning_ratio: Option<f64>,
    pub timing: Option<TimingPolicy>,
    pub theta_start: Option<f64>,
    pub theta_stop: Option<f64>,
    pub theta_steps: Option<usize>,
    pub k: Option<Vec<f64>>,
    pub g_ab_over_g: Option<Vec<f64>>,
    pub c: Option<Vec<f64>>,
    pub c_start: Option<f64>,
    pub c_stop: Option<f64>,
    pub c_steps: Option<usize>,
    pub noiseless: Option<bool>,
    pub chi_mhz: Option<f64>,
    pub anharm_mhz: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub unit_convention: Option<UnitConvention>,
    pub truncation: Option<usize>,
    pub hamiltonian: Option<HamiltonianPath>,
    pub target: Option<TargetConvention>,
    pub branch: Option<Sign>,
    pub method: Option<Method>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step_fraction: Option<f64>,
    pub t_phi_e_us: Option<f64>,
    pub t_phi_f_us: Option<f64>,
    pub t_eg_us: Option<f64>,
    pub t_fe_us: Option<f64>,
    pub t_fg_us: Option<f64>,
    pub cavity_a_unit_us: Option<f64>,
    pub cavity_b_unit_us: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The scenario described by this file.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let mut s = match (&self.base, &self.scheme) {
            (Some(b), _) => scenario(b)?,
            (None, Some(name)) => {
                let v: Variant = name.parse()?;
                let k1 = self.k1.ok_or_else(|| Error::Config("k1 is required with scheme".into()))?;
                let k2 = self.k2.ok_or_else(|| Error::Config("k2 is required with scheme".into()))?;
                Scenario::base(self.id.as_deref().unwrap_or("custom"), Scheme::new(v, k1, k2))
            }
            (None, None) => return Err(Error::Config("either base or scheme must be given".into())),
        };
        if self.base.is_some() {
            if let Some(name) = &self.scheme {
                s.scheme.variant = name.parse()?;
            }
            if let Some(k1) = self.k1 {
                s.scheme.k1 = k1;
            }
            if let Some(k2) = self.k2 {
                s.scheme.k2 = k2;
            }
            if self.scheme.is_some() || self.k1.is_some() || self.k2.is_some() {
                // the built-in expectations belong to the built-in scheme
                s.expectations.clear();
            }
        }
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value {
                    $field = v;
                }
            };
        }
        set!(s.id, self.id.clone());
        set!(s.scheme.fe_branch, self.fe_branch);
        if self.detuning_ratio.is_some() {
            s.detuning_ratio = self.detuning_ratio;
        }
        set!(s.timing, self.timing);
        set!(s.theta.start, self.theta_start);
        set!(s.theta.stop, self.theta_stop);
        set!(s.theta.steps, self.theta_steps);
        set!(s.k_values, self.k.clone());
        set!(s.crosstalk, self.g_ab_over_g.clone());
        match (&self.c, self.c_start, self.c_stop, self.c_steps) {
            (Some(_), Some(_), _, _) | (Some(_), _, Some(_), _) | (Some(_), _, _, Some(_)) => {
                return Err(Error::Config("give either c or c_start/c_stop/c_steps".into()))
            }
            (Some(c), None, None, None) => s.inhomogeneity = c.clone(),
            (None, Some(a), Some(b), Some(n)) => s.inhomogeneity = Grid::new(a, b, n).points(),
            (None, None, None, None) => {}
            _ => return Err(Error::Config("c_start, c_stop and c_steps go together".into())),
        }
        set!(s.noiseless, self.noiseless);
        set!(s.chi, self.chi_mhz);
        set!(s.anharm, self.anharm_mhz);
        set!(s.alpha, self.alpha);
        set!(s.beta, self.beta);
        set!(s.unit_convention, self.unit_convention);
        set!(s.truncation, self.truncation);
        set!(s.hamiltonian, self.hamiltonian);
        set!(s.target, self.target);
        set!(s.branch, self.branch);
        set!(s.integrator.method, self.method);
        set!(s.integrator.rel_tol, self.rel_tol);
        set!(s.integrator.abs_tol, self.abs_tol);
        set!(s.integrator.max_step_fraction, self.max_step_fraction);
        set!(s.decay.t_phi_e, self.t_phi_e_us);
        set!(s.decay.t_phi_f, self.t_phi_f_us);
        set!(s.decay.t_eg, self.t_eg_us);
        set!(s.decay.t_fe, self.t_fe_us);
        set!(s.decay.t_fg, self.t_fg_us);
        set!(s.decay.cavity_a_unit, self.cavity_a_unit_us);
        set!(s.decay.cavity_b_unit, self.cavity_b_unit_us);
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_base() {
        let cfg = RunConfig::parse(
            r#"
            base = "fig4a"
            id = "coarse"
            theta_steps = 8
            k = [1.0, 10.0]
            unit_convention = "angular"
            timing = "swap-condition"
            target = "parity-corrected"
            method = "dopri5"
            "#,
        )
        .unwrap();
        let s = cfg.to_scenario().unwrap();
        assert_eq!(s.id, "coarse");
        assert_eq!(s.theta.steps, 8);
        assert_eq!(s.k_values, vec![1.0, 10.0]);
        assert_eq!(s.unit_convention, UnitConvention::Angular);
        assert_eq!(s.timing, TimingPolicy::SwapCondition);
        assert_eq!(s.target, TargetConvention::ParityCorrected);
        assert_eq!(s.integrator.method, Method::Dopri5);
        assert!(!s.expectations.is_empty());
    }

    #[test]
    fn custom_scheme_and_c_range() {
        let s = RunConfig::parse(
            "scheme = \"fe\"\nk1 = 1\nk2 = 0\ndetuning_ratio = 9.0\nc_start = 0.98\nc_stop = 1.02\nc_steps = 5\nhamiltonian = \"full\"",
        )
        .unwrap()
        .to_scenario()
        .unwrap();
        assert_eq!(s.scheme.variant, Variant::FAuxEControl);
        assert_eq!(s.inhomogeneity.len(), 5);
        assert_eq!(s.ratio().unwrap(), 9.0);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(RunConfig::parse("bogus_key = 1").is_err());
        assert!(RunConfig::parse("theta_steps = \"many\"").is_err());
        assert!(RunConfig::parse("id = \"x\"").unwrap().to_scenario().is_err());
        assert!(RunConfig::parse("scheme = \"eg\"").unwrap().to_scenario().is_err());
        assert!(RunConfig::parse("base = \"fig4a\"\nk = [-1.0]").unwrap().to_scenario().is_err());
        assert!(RunConfig::parse("base = \"fig4a\"\nc = [1.0]\nc_steps = 3").unwrap().to_scenario().is_err());
    }
}
