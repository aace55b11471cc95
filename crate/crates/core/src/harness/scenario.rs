use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::{IntegratorSpec, NoiseSpec};
use crate::error::{Error, Result};
use crate::model::{detuning_ratio, FeBranch, ModelParams, Scheme, TimingPolicy, UnitConvention, Variant};
use crate::oracle::{Sign, TargetConvention};
use crate::protocol::{HamiltonianPath, ProtocolModel};
use crate::tensor::SpaceLayout;
use num_traits::ToPrimitive;

/// Uniform grid with both end points included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, steps: usize) -> Self {
        Grid { start, stop, steps }
    }

    pub fn single(x: f64) -> Self {
        Grid::new(x, x, 1)
    }

    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// Inverse decay times in µs; cavity times are multiplied by the scale `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayTimes {
    pub t_phi_e: f64,
    pub t_phi_f: f64,
    pub t_eg: f64,
    pub t_fe: f64,
    pub t_fg: f64,
    /// `κ_A⁻¹ = cavity_a_unit · k`.
    pub cavity_a_unit: f64,
    pub cavity_b_unit: f64,
}

impl Default for DecayTimes {
    fn default() -> Self {
        DecayTimes {
            t_phi_e: 15.0,
            t_phi_f: 10.0,
            t_eg: 50.0,
            t_fe: 25.0,
            t_fg: 100.0,
            cavity_a_unit: 1.5,
            cavity_b_unit: 1.0,
        }
    }
}

/// Target values a sweep is checked against in `--check` mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    /// Restrict to rows with this decay scale; `None` matches all.
    pub k: Option<f64>,
    pub g_ab_over_g: Option<f64>,
    /// Inclusive `c` window.
    pub c_range: Option<(f64, f64)>,
    pub average: Option<f64>,
    pub minimum: Option<f64>,
}

impl Expectation {
    fn average_at(k: Option<f64>, g_ab_over_g: f64, average: f64) -> Self {
        Expectation {
            k,
            g_ab_over_g: Some(g_ab_over_g),
            c_range: None,
            average: Some(average),
            minimum: None,
        }
    }

    fn minimum_over_all(minimum: f64) -> Self {
        Expectation {
            k: None,
            g_ab_over_g: None,
            c_range: None,
            average: None,
            minimum: Some(minimum),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub scheme: Scheme,
    /// Overrides the scheme's own `Δ/α` rule.
    pub detuning_ratio: Option<f64>,
    pub timing: TimingPolicy,
    pub theta: Grid,
    pub k_values: Vec<f64>,
    pub crosstalk: Vec<f64>,
    pub inhomogeneity: Vec<f64>,
    pub decay: DecayTimes,
    /// When set, all decay channels are switched off.
    pub noiseless: bool,
    /// MHz, converted with `unit_convention`.
    pub chi: f64,
    pub anharm: f64,
    /// Inputs `|α⟩_A`, `|-β⟩_B`.
    pub alpha: f64,
    pub beta: f64,
    pub unit_convention: UnitConvention,
    pub truncation: usize,
    pub hamiltonian: HamiltonianPath,
    pub target: TargetConvention,
    pub branch: Sign,
    pub integrator: IntegratorSpec,
    pub expectations: Vec<Expectation>,
}

pub const DEFAULT_THETA_STEPS: usize = 64;
pub const DECAY_SCALES: [f64; 6] = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0];
pub const CROSSTALK_LEVELS: [f64; 3] = [0.0, 0.01, 0.1];

impl Scenario {
    /// Full-Hamiltonian θ sweep at `k = 10` with the standard parameter set.
    pub fn base(id: &str, scheme: Scheme) -> Self {
        Scenario {
            id: id.to_string(),
            scheme,
            detuning_ratio: None,
            timing: TimingPolicy::Strict,
            theta: Grid::new(0.0, TAU, DEFAULT_THETA_STEPS),
            k_values: vec![10.0],
            crosstalk: vec![0.0],
            inhomogeneity: vec![1.0],
            decay: DecayTimes::default(),
            noiseless: false,
            chi: 1.0,
            anharm: 115.0,
            alpha: 0.1,
            beta: 0.1,
            unit_convention: UnitConvention::Cyclic,
            truncation: 8,
            hamiltonian: HamiltonianPath::Full,
            target: TargetConvention::Nominal,
            branch: Sign::Plus,
            integrator: IntegratorSpec::default(),
            expectations: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("scenario {}: {msg}", self.id)));
        if self.id.is_empty() {
            return bad("empty id".into());
        }
        if self.theta.steps == 0 || self.k_values.is_empty() || self.crosstalk.is_empty() || self.inhomogeneity.is_empty() {
            return bad("every grid needs at least one point".into());
        }
        let th = self.theta.points();
        if th.iter().any(|t| !(*t >= 0.0 && *t <= TAU)) {
            return bad(format!("theta grid {:?} leaves [0, 2π]", self.theta));
        }
        if self.k_values.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return bad("decay scales must be > 0".into());
        }
        if self.crosstalk.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return bad("crosstalk levels must be >= 0".into());
        }
        if self.inhomogeneity.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return bad("coupling ratios c must be > 0".into());
        }
        if self.truncation < 2 {
            return bad(format!("truncation {} < 2", self.truncation));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return bad("input amplitudes must be finite".into());
        }
        Ok(())
    }

    /// `Δ/α` actually used.
    pub fn ratio(&self) -> Result<f64> {
        match self.detuning_ratio {
            Some(r) => Ok(r),
            None => detuning_ratio(&self.scheme)?
                .to_f64()
                .ok_or_else(|| Error::Config("detuning ratio not representable".into())),
        }
    }

    pub fn layout(&self) -> Result<SpaceLayout> {
        SpaceLayout::symmetric(self.truncation)
    }

    /// Model at one grid point.
    pub fn model(&self, k: f64, g_ab_over_g: f64, c: f64) -> Result<(ProtocolModel, NoiseSpec)> {
        let mut p = ModelParams::from_dispersive(self.chi, self.anharm, self.ratio()?, self.unit_convention)?;
        p.g_ab = g_ab_over_g * p.g;
        p.coupling_asymmetry = c;
        if !self.noiseless {
            let d = &self.decay;
            p.gamma_phi_e = 1.0 / d.t_phi_e;
            p.gamma_phi_f = 1.0 / d.t_phi_f;
            p.gamma_eg = 1.0 / d.t_eg;
            p.gamma_fe = 1.0 / d.t_fe;
            p.gamma_fg = 1.0 / d.t_fg;
            p.kappa_a = 1.0 / (d.cavity_a_unit * k);
            p.kappa_b = 1.0 / (d.cavity_b_unit * k);
        }
        p.validate()?;
        let noise = NoiseSpec::from_params(&p);
        let model = ProtocolModel::new(p, self.layout()?)
            .with_timing(self.timing)
            .with_integrator(self.integrator);
        Ok((model, noise))
    }
}

/// Identifiers of the built-in scenarios.
pub const SCENARIO_IDS: [&str; 13] = [
    "fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b", "fig7a", "fig7b", "fig7b-consistent",
    "fig8a", "fig8b", "fig9a", "fig9b",
];

fn inhomogeneity_grid() -> Vec<f64> {
    Grid::new(0.95, 1.05, 11).points()
}

/// Built-in scenario by id.
pub fn scenario(id: &str) -> Result<Scenario> {
    let eg = Scheme::new(Variant::EAuxGControl, 1, 2);
    let ef = Scheme::new(Variant::EAuxFControl, 2, 0);
    let fg = Scheme::new(Variant::FAuxGControl, 1, 0);
    let fe = Scheme::new(Variant::FAuxEControl, 1, 0).with_fe_branch(FeBranch::Lower);

    let decay_sweep = |id: &str, scheme: Scheme, averages: [f64; 6], minimum: f64| {
        let mut s = Scenario::base(id, scheme);
        s.k_values = DECAY_SCALES.to_vec();
        s.expectations = DECAY_SCALES
            .iter()
            .zip(averages)
            .map(|(k, a)| Expectation::average_at(Some(*k), 0.0, a))
            .collect();
        s.expectations.push(Expectation::minimum_over_all(minimum));
        s
    };
    let crosstalk_sweep = |id: &str, scheme: Scheme, averages: [f64; 3]| {
        let mut s = Scenario::base(id, scheme);
        s.crosstalk = CROSSTALK_LEVELS.to_vec();
        s.expectations = CROSSTALK_LEVELS
            .iter()
            .zip(averages)
            .map(|(g, a)| Expectation::average_at(Some(10.0), *g, a))
            .collect();
        s
    };
    let inhomogeneity_sweep = |id: &str, scheme: Scheme, g_ab: f64| {
        let mut s = Scenario::base(id, scheme);
        s.crosstalk = vec![g_ab];
        s.inhomogeneity = inhomogeneity_grid();
        s
    };
    let swap_timed = |mut s: Scenario| {
        s.timing = TimingPolicy::SwapCondition;
        s
    };

    let s = match id {
        "fig4a" => decay_sweep(id, eg, [0.9731, 0.9743, 0.9743, 0.9743, 0.9743, 0.9743], 0.9607),
        "fig4b" => decay_sweep(id, ef, [0.9790; 6], 0.9604),
        "fig5a" => crosstalk_sweep(id, eg, [0.9743, 0.9706, 0.9693]),
        "fig5b" => crosstalk_sweep(id, ef, [0.9790, 0.9775, 0.9312]),
        "fig6a" => inhomogeneity_sweep(id, eg, 0.1),
        "fig6b" => inhomogeneity_sweep(id, ef, 0.01),
        "fig7a" => decay_sweep(id, fg, [0.9813; 6], 0.9606),
        "fig7b" => swap_timed(decay_sweep(id, fe, [0.9521; 6], 0.9222)),
        "fig7b-consistent" => {
            let mut s = Scenario::base(id, fe);
            s.detuning_ratio = Some(9.0);
            s
        }
        "fig8a" => crosstalk_sweep(id, fg, [0.9813, 0.9782, 0.9803]),
        "fig8b" => swap_timed(crosstalk_sweep(id, fe, [0.9521, 0.9503, 0.9505])),
        "fig9a" => {
            let mut s = inhomogeneity_sweep(id, fg, 0.1);
            s.expectations.push(Expectation {
                k: None,
                g_ab_over_g: None,
                c_range: Some((0.97, 1.03)),
                average: None,
                minimum: Some(0.9561),
            });
            s
        }
        "fig9b" => swap_timed(inhomogeneity_sweep(id, fe, 0.01)),
        _ => {
            return Err(Error::Config(format!(
                "unknown scenario '{id}' (known: {})",
                SCENARIO_IDS.join(", ")
            )))
        }
    };
    Ok(s)
}

pub fn all_scenarios() -> Vec<Scenario> {
    SCENARIO_IDS.iter().map(|id| scenario(id).expect("registered")).collect()
}
