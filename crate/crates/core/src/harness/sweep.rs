use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{Expectation, Scenario};
use crate::dynamics::{
    evolve_exact, evolve_unitary, Diagnostics, IntegratorSpec, MasterEquation, NoiseSpec,
};
use crate::error::{Error, Result};
use crate::oracle::{Sign, TargetConvention};
use crate::protocol::{
    measure_evolved, HamiltonianPath, ProtocolConfig, ProtocolModel, SwapEvolution,
};
use crate::tensor::{
    coherent_state, from_row_major, qutrit_state, to_row_major, CMatrix, CVector, Level,
    QuantumState, SpaceLayout,
};

/// One `(k, g_AB/g, c)` combination; each is evolved independently.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub k: f64,
    pub g_ab_over_g: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: String,
    pub theta: f64,
    pub k: f64,
    pub g_ab_over_g: f64,
    pub c: f64,
    pub fidelity: Option<f64>,
    pub p_plus: Option<f64>,
    pub p_minus: Option<f64>,
    pub p_ref: Option<f64>,
    pub trace_deficit: Option<f64>,
    pub min_eig: Option<f64>,
    pub hermiticity_deficit: Option<f64>,
    /// Seconds spent on the grid point this row belongs to.
    pub wall_time: f64,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(scenario: &str, theta: f64, p: GridPoint, wall_time: f64, err: &Error) -> Self {
        SweepRow {
            scenario: scenario.to_string(),
            theta,
            k: p.k,
            g_ab_over_g: p.g_ab_over_g,
            c: p.c,
            fidelity: None,
            p_plus: None,
            p_minus: None,
            p_ref: None,
            trace_deficit: None,
            min_eig: None,
            hermiticity_deficit: None,
            wall_time,
            error: Some(err.to_string()),
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

/// Everything needed to reproduce a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub code_version: String,
    pub scenario: String,
    pub scheme: String,
    pub k1: u32,
    pub k2: u32,
    pub detuning_ratio: f64,
    pub timing: String,
    pub unit_convention: String,
    pub hamiltonian: String,
    pub target: String,
    pub branch: String,
    pub truncation: usize,
    pub chi_mhz: f64,
    pub anharm_mhz: f64,
    pub alpha: f64,
    pub beta: f64,
    pub noiseless: bool,
    pub integrator: IntegratorSpec,
    pub theta_steps: usize,
}

impl SweepMetadata {
    pub fn of(s: &Scenario) -> Result<Self> {
        Ok(SweepMetadata {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: s.id.clone(),
            scheme: s.scheme.variant.to_string(),
            k1: s.scheme.k1,
            k2: s.scheme.k2,
            detuning_ratio: s.ratio()?,
            timing: format!("{:?}", s.timing),
            unit_convention: s.unit_convention.name().to_string(),
            hamiltonian: format!("{:?}", s.hamiltonian).to_lowercase(),
            target: match s.target {
                TargetConvention::Nominal => "nominal".into(),
                TargetConvention::ParityCorrected => "parity-corrected".into(),
            },
            branch: match s.branch {
                Sign::Plus => "plus".into(),
                Sign::Minus => "minus".into(),
            },
            truncation: s.truncation,
            chi_mhz: s.chi,
            anharm_mhz: s.anharm,
            alpha: s.alpha,
            beta: s.beta,
            noiseless: s.noiseless,
            integrator: s.integrator,
            theta_steps: s.theta.steps,
        })
    }

    /// `key = value` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let i = &self.integrator;
        vec![
            ("code_version".into(), self.code_version.clone()),
            ("scenario".into(), self.scenario.clone()),
            ("scheme".into(), self.scheme.clone()),
            ("k1".into(), self.k1.to_string()),
            ("k2".into(), self.k2.to_string()),
            ("detuning_ratio".into(), self.detuning_ratio.to_string()),
            ("timing".into(), self.timing.clone()),
            ("unit_convention".into(), self.unit_convention.clone()),
            ("hamiltonian".into(), self.hamiltonian.clone()),
            ("target".into(), self.target.clone()),
            ("branch".into(), self.branch.clone()),
            ("truncation".into(), self.truncation.to_string()),
            ("chi_mhz".into(), self.chi_mhz.to_string()),
            ("anharm_mhz".into(), self.anharm_mhz.to_string()),
            ("alpha".into(), self.alpha.to_string()),
            ("beta".into(), self.beta.to_string()),
            ("noiseless".into(), self.noiseless.to_string()),
            ("integrator".into(), i.method.name().to_string()),
            ("rel_tol".into(), i.rel_tol.to_string()),
            ("abs_tol".into(), i.abs_tol.to_string()),
            ("max_step_fraction".into(), i.max_step_fraction.to_string()),
            ("theta_steps".into(), self.theta_steps.to_string()),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_error()).count()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

/// The evolved images of the two ancilla branches.
///
/// The ancilla amplitudes are real, so the state at any θ is
/// `s² E(GG) + c² E(XX) + s c (E(GX) + E(GX)†)` by linearity.
enum Branches {
    Pure { g: CVector, x: CVector },
    Mixed { gg: CMatrix, xx: CMatrix, gx: CMatrix },
}

impl Branches {
    fn at(&self, theta: f64, time: f64, layout: SpaceLayout) -> Result<(QuantumState, Diagnostics)> {
        let (s, c) = (theta.sin(), theta.cos());
        let r = |x: f64| Complex64::new(x, 0.0);
        match self {
            Branches::Pure { g, x } => {
                let v = g * r(s) + x * r(c);
                let d = Diagnostics {
                    time,
                    trace_deficit: (v.norm_squared() - 1.0).abs(),
                    hermiticity_deficit: 0.0,
                    min_eigenvalue: 0.0,
                };
                Ok((QuantumState::pure(layout, v)?, d))
            }
            Branches::Mixed { gg, xx, gx } => {
                let m = gg * r(s * s) + xx * r(c * c) + (gx + gx.adjoint()) * r(s * c);
                let d = Diagnostics::of(time, &m);
                Ok((QuantumState::density(layout, m)?, d))
            }
        }
    }
}

/// Single-mode inputs `|α⟩`, `|-β⟩`, renormalized after truncation.
pub fn scenario_inputs(s: &Scenario) -> Result<(CVector, CVector)> {
    let n = s.truncation;
    let a = coherent_state(Complex64::new(s.alpha, 0.0), n)?.normalize();
    let b = coherent_state(Complex64::new(-s.beta, 0.0), n)?.normalize();
    Ok((a, b))
}

fn evolve_branches(s: &Scenario, model: &ProtocolModel, noise: &NoiseSpec) -> Result<(Branches, f64)> {
    let layout = model.layout;
    let (psi, phi) = scenario_inputs(s)?;
    let t = model.protocol_time(&s.scheme)?;
    let h = model.hamiltonian(s.hamiltonian)?;
    let partner = s.scheme.variant.partner();
    let branch = |level: Level| {
        QuantumState::product(layout, &qutrit_state(level), &psi, &phi)
    };
    let g0 = branch(Level::G)?;
    let x0 = branch(partner)?;
    if noise.is_empty() {
        let run = |state: &QuantumState| -> Result<CVector> {
            let out = match s.hamiltonian {
                HamiltonianPath::Effective => evolve_exact(state, h.constant(), t)?,
                HamiltonianPath::Full => evolve_unitary(state, &h, t, &model.integrator)?,
            };
            Ok(out.as_pure().expect("pure in, pure out").clone())
        };
        return Ok((Branches::Pure { g: run(&g0)?, x: run(&x0)? }, t));
    }
    let g = g0.as_pure().expect("product state");
    let x = x0.as_pure().expect("product state");
    let mut eq = MasterEquation::new(&h, noise)?;
    let dim = layout.dim();
    let mut run = |ket: &CVector, bra: &CVector, hermitian: bool| -> Result<CMatrix> {
        eq.set_hermitian_input(hermitian);
        let rho0 = ket * bra.adjoint();
        let (y, _, _) = eq.evolve_raw(&to_row_major(&rho0), t, &model.integrator, &[])?;
        Ok(from_row_major(dim, &y))
    };
    let gg = run(g, g, true)?;
    let xx = run(x, x, true)?;
    let gx = run(g, x, false)?;
    Ok((Branches::Mixed { gg, xx, gx }, t))
}

fn protocol_config(s: &Scenario, theta: f64, psi: &CVector, phi: &CVector) -> ProtocolConfig {
    let mut cfg = ProtocolConfig::new(s.scheme, theta, psi.clone(), phi.clone());
    cfg.branch = s.branch;
    cfg.path = s.hamiltonian;
    cfg.target = s.target;
    cfg
}

/// All θ rows of one grid point. Errors are recorded per row.
pub fn run_point(s: &Scenario, p: GridPoint) -> Vec<SweepRow> {
    let start = Instant::now();
    let thetas = s.theta.points();
    let fail_all = |e: &Error, wall: f64| -> Vec<SweepRow> {
        thetas.iter().map(|t| SweepRow::failed(&s.id, *t, p, wall, e)).collect()
    };
    let prepared = s
        .model(p.k, p.g_ab_over_g, p.c)
        .and_then(|(model, noise)| {
            let inputs = scenario_inputs(s)?;
            evolve_branches(s, &model, &noise).map(|(b, t)| (model, b, t, inputs))
        });
    let (model, branches, t, (psi, phi)) = match prepared {
        Ok(x) => x,
        Err(e) => return fail_all(&e, start.elapsed().as_secs_f64()),
    };
    let layout = model.layout;
    let mut rows: Vec<SweepRow> = thetas
        .iter()
        .map(|&theta| {
            let cfg = protocol_config(s, theta, &psi, &phi);
            let measured = branches.at(theta, t, layout).and_then(|(state, diag)| {
                let evolved = SwapEvolution {
                    state,
                    time: t,
                    diagnostics: Some(diag),
                    stats: None,
                };
                measure_evolved(evolved, &cfg, layout).map(|r| (r, diag))
            });
            match measured {
                Ok((r, d)) => SweepRow {
                    scenario: s.id.clone(),
                    theta,
                    k: p.k,
                    g_ab_over_g: p.g_ab_over_g,
                    c: p.c,
                    fidelity: Some(r.fidelity_vs_ideal),
                    p_plus: Some(r.p_plus),
                    p_minus: Some(r.p_minus),
                    p_ref: r.readout.as_ref().ok().map(|o| o.p_reference),
                    trace_deficit: Some(d.trace_deficit),
                    min_eig: Some(d.min_eigenvalue),
                    hermiticity_deficit: Some(d.hermiticity_deficit),
                    wall_time: 0.0,
                    error: None,
                },
                Err(e) => SweepRow::failed(&s.id, theta, p, 0.0, &e),
            }
        })
        .collect();
    let wall = start.elapsed().as_secs_f64();
    for r in &mut rows {
        r.wall_time = wall;
    }
    rows
}

/// Grid points in emission order: `k`, then crosstalk, then `c`.
pub fn grid_points(s: &Scenario) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for &k in &s.k_values {
        for &g_ab_over_g in &s.crosstalk {
            for &c in &s.inhomogeneity {
                out.push(GridPoint { k, g_ab_over_g, c });
            }
        }
    }
    out
}

/// Runs every grid point of `s`; rows come out in grid order then θ order.
pub fn run_sweep(s: &Scenario, opts: SweepOptions) -> Result<SweepResult> {
    s.validate()?;
    let metadata = SweepMetadata::of(s)?;
    let points = grid_points(s);
    let work = || -> Vec<SweepRow> {
        points
            .par_iter()
            .map(|p| run_point(s, *p))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let rows = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(SweepResult { metadata, rows })
}

/// θ sweep at every decay scale; crosstalk and inhomogeneity must be trivial.
pub fn run_theta_sweep(s: &Scenario, opts: SweepOptions) -> Result<SweepResult> {
    if s.crosstalk != [0.0] || s.inhomogeneity != [1.0] {
        return Err(Error::Config(format!(
            "{} is not a plain θ sweep (crosstalk {:?}, c {:?})",
            s.id, s.crosstalk, s.inhomogeneity
        )));
    }
    run_sweep(s, opts)
}

pub fn run_crosstalk_sweep(s: &Scenario, opts: SweepOptions) -> Result<SweepResult> {
    if s.inhomogeneity != [1.0] {
        return Err(Error::Config(format!("{} varies c; use the inhomogeneity sweep", s.id)));
    }
    run_sweep(s, opts)
}

pub fn run_inhomogeneity_sweep(s: &Scenario, opts: SweepOptions) -> Result<SweepResult> {
    if s.hamiltonian != HamiltonianPath::Full && s.inhomogeneity.iter().any(|c| *c != 1.0) {
        return Err(Error::Config(format!(
            "{}: unequal couplings need the full Hamiltonian",
            s.id
        )));
    }
    run_sweep(s, opts)
}

/// Mean fidelity of the successful rows selected by `filter`.
pub fn average_fidelity(result: &SweepResult, filter: impl Fn(&SweepRow) -> bool) -> Result<f64> {
    let f: Vec<f64> = result
        .rows
        .iter()
        .filter(|r| filter(r))
        .filter_map(|r| r.fidelity)
        .collect();
    if f.is_empty() {
        return Err(Error::EmptySelection(format!(
            "no successful rows selected in {}",
            result.metadata.scenario
        )));
    }
    Ok(f.iter().sum::<f64>() / f.len() as f64)
}

pub fn minimum_fidelity(result: &SweepResult, filter: impl Fn(&SweepRow) -> bool) -> Result<f64> {
    result
        .rows
        .iter()
        .filter(|r| filter(r))
        .filter_map(|r| r.fidelity)
        .reduce(f64::min)
        .ok_or_else(|| Error::EmptySelection(format!("no rows in {}", result.metadata.scenario)))
}

/// Statistics per grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: GridPoint,
    pub average: Option<f64>,
    pub minimum: Option<f64>,
    pub rows: usize,
    pub errors: usize,
}

pub fn summarize(result: &SweepResult) -> Vec<PointSummary> {
    let mut out: Vec<PointSummary> = Vec::new();
    for r in &result.rows {
        let p = GridPoint {
            k: r.k,
            g_ab_over_g: r.g_ab_over_g,
            c: r.c,
        };
        if out.last().map(|s| s.point) != Some(p) {
            out.push(PointSummary {
                point: p,
                average: None,
                minimum: None,
                rows: 0,
                errors: 0,
            });
        }
        let s = out.last_mut().expect("pushed above");
        s.rows += 1;
        if r.is_error() {
            s.errors += 1;
        }
    }
    for s in &mut out {
        let p = s.point;
        let same = |r: &SweepRow| r.k == p.k && r.g_ab_over_g == p.g_ab_over_g && r.c == p.c;
        s.average = average_fidelity(result, same).ok();
        s.minimum = minimum_fidelity(result, same).ok();
    }
    out
}

/// Result of comparing a sweep with one expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub expectation: Expectation,
    pub average: Option<f64>,
    pub minimum: Option<f64>,
    pub passed: bool,
}

fn matches(e: &Expectation, r: &SweepRow) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    e.k.map_or(true, |k| close(r.k, k))
        && e.g_ab_over_g.map_or(true, |g| close(r.g_ab_over_g, g))
        && e.c_range.map_or(true, |(lo, hi)| r.c >= lo - 1e-12 && r.c <= hi + 1e-12)
}

/// Averages within `tolerance` and minima above `minimum - tolerance`.
/// Expectations that select no rows are skipped.
pub fn check_expectations(result: &SweepResult, expectations: &[Expectation], tolerance: f64) -> Vec<CheckOutcome> {
    expectations
        .iter()
        .filter_map(|e| {
            let avg = average_fidelity(result, |r| matches(e, r)).ok()?;
            let min = minimum_fidelity(result, |r| matches(e, r)).ok();
            let ok_avg = e.average.map_or(true, |a| (avg - a).abs() <= tolerance);
            let ok_min = match (e.minimum, min) {
                (Some(want), Some(got)) => got >= want - tolerance,
                _ => true,
            };
            Some(CheckOutcome {
                expectation: e.clone(),
                average: Some(avg),
                minimum: min,
                passed: ok_avg && ok_min,
            })
        })
        .collect()
}
