//! The adder pipeline: ancilla preparation, controlled swap, qutrit pulses,
//! qutrit readout and projection of cavity B onto a referential state.

mod measure;

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    evolve_exact, evolve_master, evolve_unitary_with_stats, Diagnostics, IntegrationStats,
    IntegratorSpec, NoiseSpec,
};
use crate::error::{Error, Result};
use crate::model::{
    detuning_ratio, effective_hamiltonian_for, full_hamiltonian, protocol_time, AsymmetryPolicy,
    DispersiveShifts, ModelParams, Scheme, TimeDependentHamiltonian, TimingPolicy, UnitConvention,
};
use crate::oracle::{nominal_sign, parity, scheme_adder, Sign, TargetConvention};
use crate::tensor::{fidelity, fock_state, qutrit_state, CMatrix, CVector, Level, QuantumState, SpaceLayout};

pub use measure::{
    apply_rotations, measure_cavity_reference, measure_qutrit, mode_overlap, outcome_level,
    outcome_probabilities, qutrit_rotation, rotation_sequence, Rotation, MIN_BRANCH_PROB,
};

/// Smallest `|⟨χ|ψ⟩|` accepted for the referential state.
pub const MIN_REFERENCE_OVERLAP: f64 = 1e-12;

/// Norm slack on the single-mode inputs.
pub const INPUT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianPath {
    /// Time-independent dispersive Hamiltonian.
    #[default]
    Effective,
    /// Interaction-picture Hamiltonian with the counter-rotating qutrit-cavity terms.
    Full,
}

impl std::str::FromStr for HamiltonianPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "effective" => Ok(HamiltonianPath::Effective),
            "full" => Ok(HamiltonianPath::Full),
            _ => Err(Error::Config(format!("unknown hamiltonian path '{s}'"))),
        }
    }
}

/// Physical parameters, truncation and numerics shared by every run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolModel {
    pub params: ModelParams,
    pub layout: SpaceLayout,
    pub timing: TimingPolicy,
    pub asymmetry: AsymmetryPolicy,
    pub integrator: IntegratorSpec,
}

impl ProtocolModel {
    pub fn new(params: ModelParams, layout: SpaceLayout) -> Self {
        ProtocolModel {
            params,
            layout,
            timing: TimingPolicy::default(),
            asymmetry: AsymmetryPolicy::default(),
            integrator: IntegratorSpec::default(),
        }
    }

    /// Noiseless model at the scheme's own detuning, `χ` and `α` quoted in MHz.
    pub fn for_scheme(
        scheme: &Scheme,
        chi: f64,
        anharm: f64,
        convention: UnitConvention,
        layout: SpaceLayout,
    ) -> Result<Self> {
        Self::at_ratio(detuning_ratio(scheme)?, chi, anharm, convention, layout)
    }

    pub fn at_ratio(
        ratio: Rational64,
        chi: f64,
        anharm: f64,
        convention: UnitConvention,
        layout: SpaceLayout,
    ) -> Result<Self> {
        let r = ratio
            .to_f64()
            .ok_or_else(|| Error::InvalidParameter(format!("detuning ratio {ratio}")))?;
        let params = ModelParams::from_dispersive(chi, anharm, r, convention)?;
        Ok(Self::new(params, layout))
    }

    pub fn with_timing(mut self, timing: TimingPolicy) -> Self {
        self.timing = timing;
        self
    }

    pub fn with_integrator(mut self, spec: IntegratorSpec) -> Self {
        self.integrator = spec;
        self
    }

    pub fn shifts(&self) -> Result<DispersiveShifts> {
        DispersiveShifts::from_params(&self.params)
    }

    pub fn protocol_time(&self, scheme: &Scheme) -> Result<f64> {
        protocol_time(scheme, &self.shifts()?, self.timing)
    }

    pub fn hamiltonian(&self, path: HamiltonianPath) -> Result<TimeDependentHamiltonian> {
        match path {
            HamiltonianPath::Effective => Ok(TimeDependentHamiltonian::constant_only(
                effective_hamiltonian_for(&self.params, self.layout, self.asymmetry)?,
            )),
            HamiltonianPath::Full => full_hamiltonian(&self.params, self.layout),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub scheme: Scheme,
    /// Ancilla `sin θ |g⟩ + cos θ |x⟩`.
    pub theta: f64,
    pub input_a: CVector,
    pub input_b: CVector,
    /// Referential state `|χ⟩` for the cavity-B projection.
    pub reference: CVector,
    pub branch: Sign,
    pub noise: NoiseSpec,
    pub path: HamiltonianPath,
    pub target: TargetConvention,
}

impl ProtocolConfig {
    /// Noiseless, effective path, `+` branch, vacuum reference.
    pub fn new(scheme: Scheme, theta: f64, input_a: CVector, input_b: CVector) -> Self {
        let dim_b = input_b.len();
        ProtocolConfig {
            scheme,
            theta,
            input_a,
            input_b,
            reference: fock_state(0, dim_b.max(1)).expect("dimension at least 1"),
            branch: Sign::Plus,
            noise: NoiseSpec::none(),
            path: HamiltonianPath::Effective,
            target: TargetConvention::Nominal,
        }
    }

    pub fn validate(&self, layout: SpaceLayout) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta <= TAU) {
            return Err(Error::InvalidParameter(format!(
                "theta = {} outside [0, 2π]",
                self.theta
            )));
        }
        let checks = [
            (&self.input_a, layout.fock_a(), "input_a"),
            (&self.input_b, layout.fock_b(), "input_b"),
            (&self.reference, layout.fock_b(), "reference"),
        ];
        for (v, dim, name) in checks {
            if v.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "{name} has {} levels, layout {layout} needs {dim}",
                    v.len()
                )));
            }
            if (v.norm() - 1.0).abs() > INPUT_NORM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "{name} is not normalized (norm {})",
                    v.norm()
                )));
            }
        }
        // ⟨χ|ψ⟩ only needs the overlap in cavity-B dimensions
        let (na, nb) = (layout.fock_a(), layout.fock_b());
        let psi_b = CVector::from_fn(nb, |i, _| if i < na { self.input_a[i] } else { Complex64::new(0.0, 0.0) });
        for (v, name) in [(&psi_b, "input_a"), (&self.input_b, "input_b")] {
            let o = self.reference.dotc(v).norm();
            if !(o > MIN_REFERENCE_OVERLAP) {
                return Err(Error::InvalidParameter(format!(
                    "reference state is orthogonal to {name} (|overlap| = {o:e})"
                )));
            }
        }
        Ok(())
    }
}

/// `(sin θ |g⟩ + cos θ |x⟩) ⊗ |ψ⟩_A ⊗ |φ⟩_B`.
pub fn prepare_initial_state(config: &ProtocolConfig, layout: SpaceLayout) -> Result<QuantumState> {
    config.validate(layout)?;
    let q = ancilla(config.scheme, config.theta);
    QuantumState::product(layout, &q, &config.input_a, &config.input_b)
}

fn ancilla(scheme: Scheme, theta: f64) -> CVector {
    qutrit_state(Level::G) * Complex64::new(theta.sin(), 0.0)
        + qutrit_state(scheme.variant.partner()) * Complex64::new(theta.cos(), 0.0)
}

/// Evolved state with integrator bookkeeping.
#[derive(Clone, Debug)]
pub struct SwapEvolution {
    pub state: QuantumState,
    pub time: f64,
    pub diagnostics: Option<Diagnostics>,
    pub stats: Option<IntegrationStats>,
}

/// Evolves `state` for the scheme's protocol time.
pub fn run_controlled_swap(
    state: &QuantumState,
    config: &ProtocolConfig,
    model: &ProtocolModel,
) -> Result<SwapEvolution> {
    let t = model.protocol_time(&config.scheme)?;
    let h = model.hamiltonian(config.path)?;
    if !config.noise.is_empty() {
        let ev = evolve_master(state, &h, &config.noise, t, &model.integrator, &[])?;
        return Ok(SwapEvolution {
            state: ev.final_state,
            time: t,
            diagnostics: ev.diagnostics.last().copied(),
            stats: Some(ev.stats),
        });
    }
    match config.path {
        HamiltonianPath::Effective => Ok(SwapEvolution {
            state: evolve_exact(state, h.constant(), t)?,
            time: t,
            diagnostics: None,
            stats: None,
        }),
        HamiltonianPath::Full if state.is_pure_repr() => {
            let (s, stats) = evolve_unitary_with_stats(state, &h, t, &model.integrator)?;
            Ok(SwapEvolution {
                state: s,
                time: t,
                diagnostics: None,
                stats: Some(stats),
            })
        }
        HamiltonianPath::Full => {
            let ev = evolve_master(state, &h, &config.noise, t, &model.integrator, &[])?;
            Ok(SwapEvolution {
                state: ev.final_state,
                time: t,
                diagnostics: ev.diagnostics.last().copied(),
                stats: Some(ev.stats),
            })
        }
    }
}

/// Pre-measurement target used for fidelities.
pub fn ideal_target_state(config: &ProtocolConfig, layout: SpaceLayout) -> Result<QuantumState> {
    let (psi, phi) = (&config.input_a, &config.input_b);
    let (sa, sb) = match config.target {
        TargetConvention::Nominal => (phi.clone(), psi.clone()),
        TargetConvention::ParityCorrected => (parity(phi), parity(psi)),
    };
    if sa.len() != layout.fock_a() || sb.len() != layout.fock_b() {
        return Err(Error::InvalidParameter(format!(
            "swapped inputs do not fit layout {layout}; use equal truncations"
        )));
    }
    let variant = config.scheme.variant;
    let g = qutrit_state(Level::G) * Complex64::new(config.theta.sin(), 0.0);
    let x = qutrit_state(variant.partner())
        * Complex64::new(config.theta.cos() * nominal_sign(variant).value(), 0.0);
    let (g_pair, x_pair) = if variant.swap_level() == Level::G {
        ((&sa, &sb), (psi, phi))
    } else {
        ((psi, phi), (&sa, &sb))
    };
    let v = g.kronecker(g_pair.0).kronecker(g_pair.1) + x.kronecker(x_pair.0).kronecker(x_pair.1);
    QuantumState::pure(layout, v)
}

/// Outcome of the post-selected readout.
#[derive(Clone, Debug)]
pub struct Readout {
    /// Probability of the cavity-B projection given the qutrit outcome.
    pub p_reference: f64,
    /// Normalized density matrix of cavity A.
    pub output_a: CMatrix,
    pub overall_success_prob: f64,
    /// Fidelity of `output_a` with the closed-form adder output, when that is defined.
    pub output_fidelity: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ProtocolResult {
    /// After the controlled swap, before any pulse.
    pub pre_measurement_state: QuantumState,
    pub post_rotation_state: QuantumState,
    pub p_plus: f64,
    pub p_minus: f64,
    /// `Err` holds the reason the selected branch could not be read out.
    pub readout: std::result::Result<Readout, String>,
    pub fidelity_vs_ideal: f64,
    pub protocol_time: f64,
    pub diagnostics: Option<Diagnostics>,
    pub stats: Option<IntegrationStats>,
}

fn read_out(rotated: &QuantumState, config: &ProtocolConfig) -> Result<Readout> {
    let (conditional, p_branch) = measure_qutrit(rotated, config.branch)?;
    let (output_a, p_reference) = measure_cavity_reference(&conditional, &config.reference)?;
    let output_fidelity = scheme_adder(
        config.scheme.variant,
        config.theta,
        &config.input_a,
        &config.input_b,
        &config.reference,
        config.branch,
        config.target,
    )
    .ok()
    .map(|ideal| mode_overlap(&output_a, &ideal.state).clamp(0.0, 1.0).sqrt());
    Ok(Readout {
        p_reference,
        output_a,
        overall_success_prob: p_branch * p_reference,
        output_fidelity,
    })
}

/// Ideal pulses and projections applied to an evolved state.
pub fn measure_evolved(
    evolved: SwapEvolution,
    config: &ProtocolConfig,
    layout: SpaceLayout,
) -> Result<ProtocolResult> {
    let pre = evolved.state;
    let target = ideal_target_state(config, layout)?;
    let fidelity_vs_ideal = fidelity(&target, &pre)?;
    let rotated = apply_rotations(&pre, config.scheme.variant)?;
    let (p_plus, p_minus) = outcome_probabilities(&rotated);
    let readout = read_out(&rotated, config).map_err(|e| e.to_string());
    Ok(ProtocolResult {
        pre_measurement_state: pre,
        post_rotation_state: rotated,
        p_plus,
        p_minus,
        readout,
        fidelity_vs_ideal,
        protocol_time: evolved.time,
        diagnostics: evolved.diagnostics,
        stats: evolved.stats,
    })
}

/// Runs the whole pipeline for one configuration.
pub fn run_adder(config: &ProtocolConfig, model: &ProtocolModel) -> Result<ProtocolResult> {
    let psi0 = prepare_initial_state(config, model.layout)?;
    let evolved = run_controlled_swap(&psi0, config, model)?;
    measure_evolved(evolved, config, model.layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Channel;
    use crate::model::{consistent_detuning_ratios, Variant};
    use crate::oracle::exact_target;
    use crate::tensor::coherent_state_with_tolerance;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    const N: usize = 5;

    /// Each scheme at a detuning where both timing conditions hold exactly.
    fn schemes() -> Vec<(Scheme, Rational64)> {
        let mut out = Vec::new();
        for (v, k1, k2) in [
            (Variant::EAuxGControl, 1, 2),
            (Variant::EAuxFControl, 2, 0),
            (Variant::FAuxGControl, 1, 0),
        ] {
            let s = Scheme::new(v, k1, k2);
            out.push((s, detuning_ratio(&s).unwrap()));
        }
        let fe = Scheme::new(Variant::FAuxEControl, 1, 0);
        let r = *consistent_detuning_ratios(&fe)
            .iter()
            .find(|r| **r > Rational64::from(0))
            .unwrap();
        out.push((fe, r));
        out
    }

    fn model(r: Rational64) -> ProtocolModel {
        ProtocolModel::at_ratio(r, 1.0, 115.0, UnitConvention::Angular, SpaceLayout::symmetric(N).unwrap()).unwrap()
    }

    fn superposition(coeffs: &[(f64, f64)]) -> CVector {
        let mut v = CVector::zeros(N);
        for (i, (re, im)) in coeffs.iter().enumerate() {
            v[i] = Complex64::new(*re, *im);
        }
        v.normalize()
    }

    fn inputs() -> Vec<(CVector, CVector)> {
        vec![
            (
                coherent_state_with_tolerance(c(0.1), N, 1e-3).unwrap().normalize(),
                coherent_state_with_tolerance(c(-0.1), N, 1e-3).unwrap().normalize(),
            ),
            (superposition(&[(0.6, 0.0), (0.3, -0.5), (0.1, 0.2)]), superposition(&[(0.2, 0.1), (0.0, 0.9), (0.4, 0.0)])),
            (superposition(&[(1.0, 0.0), (0.0, 1.0)]), superposition(&[(1.0, 0.0), (0.0, 1.0)])),
        ]
    }

    #[test]
    fn initial_state_is_normalized_product() {
        let (psi, phi) = inputs().remove(1);
        let scheme = Scheme::new(Variant::EAuxGControl, 1, 2);
        let layout = SpaceLayout::symmetric(N).unwrap();
        let cfg = ProtocolConfig::new(scheme, 0.0, psi.clone(), phi.clone());
        let s = prepare_initial_state(&cfg, layout).unwrap();
        let want = QuantumState::product(layout, &qutrit_state(Level::F), &psi, &phi).unwrap();
        assert!(1.0 - fidelity(&want, &s).unwrap() < 1e-15);
        let cfg = ProtocolConfig { theta: 1.234, ..cfg };
        assert_relative_eq!(prepare_initial_state(&cfg, layout).unwrap().trace(), 1.0, epsilon = 1e-14);
        let cfg = ProtocolConfig { theta: 7.0, ..cfg };
        assert!(prepare_initial_state(&cfg, layout).is_err());
    }

    #[test]
    fn orthogonal_reference_rejected() {
        let layout = SpaceLayout::symmetric(N).unwrap();
        let one = fock_state(1, N).unwrap();
        let mut cfg = ProtocolConfig::new(Scheme::new(Variant::EAuxGControl, 1, 2), 0.3, one.clone(), one.clone());
        assert!(cfg.validate(layout).is_err());
        cfg.reference = one;
        assert!(cfg.validate(layout).is_ok());
    }

    #[test]
    fn parity_corrected_target_matches_exact_maps() {
        let layout = SpaceLayout::symmetric(N).unwrap();
        for (scheme, r) in schemes() {
            for (psi, phi) in inputs() {
                for theta in [0.0, PI / 6.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0] {
                    let mut cfg = ProtocolConfig::new(scheme, theta, psi.clone(), phi.clone());
                    cfg.target = TargetConvention::ParityCorrected;
                    let a = ideal_target_state(&cfg, layout).unwrap();
                    let b = exact_target(&scheme, r, theta, &psi, &phi, layout).unwrap();
                    let d = (a.as_pure().unwrap() - b.as_pure().unwrap()).norm();
                    assert!(d < 1e-14, "{} θ={theta}: {d}", scheme.variant);
                }
            }
        }
    }

    #[test]
    fn effective_evolution_reaches_target() {
        for (scheme, r) in schemes() {
            let m = model(r);
            for (psi, phi) in inputs() {
                for theta in [0.0, PI / 6.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0] {
                    let mut cfg = ProtocolConfig::new(scheme, theta, psi.clone(), phi.clone());
                    cfg.target = TargetConvention::ParityCorrected;
                    let res = run_adder(&cfg, &m).unwrap();
                    let deficit = 1.0 - res.fidelity_vs_ideal.powi(2);
                    assert!(deficit < 1e-9, "{} θ={theta}: {deficit:e}", scheme.variant);
                }
            }
        }
    }

    #[test]
    fn pipeline_matches_abstract_adder() {
        let chi = superposition(&[(0.7, 0.0), (0.2, 0.4), (-0.3, 0.1)]);
        for (scheme, r) in schemes() {
            let m = model(r);
            let (psi, phi) = inputs().remove(1);
            for branch in [Sign::Plus, Sign::Minus] {
                let mut cfg = ProtocolConfig::new(scheme, 0.9, psi.clone(), phi.clone());
                cfg.target = TargetConvention::ParityCorrected;
                cfg.reference = chi.clone();
                cfg.branch = branch;
                let res = run_adder(&cfg, &m).unwrap();
                let ideal = scheme_adder(scheme.variant, 0.9, &psi, &phi, &chi, branch, cfg.target).unwrap();
                let out = res.readout.unwrap();
                let f = out.output_fidelity.unwrap();
                assert!(1.0 - f * f < 1e-9, "{} {branch:?}", scheme.variant);
                assert_relative_eq!(out.overall_success_prob, ideal.norm_sq, epsilon = 1e-10);
                assert_relative_eq!(res.p_plus + res.p_minus, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn nominal_target_holds_for_even_inputs() {
        let even = superposition(&[(0.8, 0.0), (0.0, 0.0), (0.3, 0.5)]);
        let even2 = superposition(&[(0.1, 0.0), (0.0, 0.0), (0.0, 1.0)]);
        for (scheme, r) in schemes() {
            let cfg = ProtocolConfig::new(scheme, 0.4, even.clone(), even2.clone());
            let res = run_adder(&cfg, &model(r)).unwrap();
            assert!(1.0 - res.fidelity_vs_ideal < 1e-10);
        }
    }

    #[test]
    fn theta_zero_g_control_keeps_inputs() {
        // only the non-swapping partner branch is populated
        let (scheme, r) = schemes()[0];
        let (psi, phi) = inputs().remove(1);
        let cfg = ProtocolConfig::new(scheme, 0.0, psi.clone(), phi.clone());
        let res = run_adder(&cfg, &model(r)).unwrap();
        let layout = SpaceLayout::symmetric(N).unwrap();
        let want = QuantumState::product(layout, &qutrit_state(Level::F), &psi, &phi).unwrap();
        assert!(1.0 - fidelity(&want, &res.pre_measurement_state).unwrap() < 1e-10);
    }

    #[test]
    fn noisy_run_reports_diagnostics() {
        let (scheme, r) = schemes()[2];
        let mut m = model(r);
        m.layout = SpaceLayout::symmetric(3).unwrap();
        let psi = coherent_state_with_tolerance(c(0.1), 3, 1e-3).unwrap().normalize();
        let phi = coherent_state_with_tolerance(c(-0.1), 3, 1e-3).unwrap().normalize();
        let mut cfg = ProtocolConfig::new(scheme, PI / 4.0, psi, phi);
        cfg.noise = NoiseSpec::none()
            .with_rate(Channel::CavityA, 1.0 / 15.0)
            .unwrap()
            .with_rate(Channel::DephaseE, 1.0 / 15.0)
            .unwrap();
        let res = run_adder(&cfg, &m).unwrap();
        let d = res.diagnostics.unwrap();
        assert!(d.within_limits(), "{d:?}");
        assert!(res.fidelity_vs_ideal < 0.999 && res.fidelity_vs_ideal > 0.5);
        assert!(res.p_plus + res.p_minus <= 1.0 + 1e-9);
        assert!((0.0..=1.0).contains(&res.readout.unwrap().overall_success_prob));
    }

    #[test]
    fn full_path_is_close_to_effective() {
        let (scheme, r) = schemes()[0];
        let mut m = model(r);
        m.layout = SpaceLayout::symmetric(3).unwrap();
        let psi = coherent_state_with_tolerance(c(0.1), 3, 1e-3).unwrap().normalize();
        let phi = coherent_state_with_tolerance(c(-0.1), 3, 1e-3).unwrap().normalize();
        let mut cfg = ProtocolConfig::new(scheme, PI / 4.0, psi, phi);
        cfg.path = HamiltonianPath::Full;
        cfg.target = TargetConvention::ParityCorrected;
        let res = run_adder(&cfg, &m).unwrap();
        assert!(res.fidelity_vs_ideal > 0.95 && res.fidelity_vs_ideal < 1.0, "{}", res.fidelity_vs_ideal);
    }
}
