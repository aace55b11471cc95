use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrator::{integrate, IntegrationStats, IntegratorSpec, OdeSystem};
use super::noise::NoiseSpec;
use crate::error::{Error, Result};
use crate::model::TimeDependentHamiltonian;
use crate::tensor::{
    hermitian_fold, Monomial,
    from_row_major, hermiticity_deficit, min_eigenvalue, to_row_major, CMatrix, Operator, QuantumState, SparseMatrix,
    SpaceLayout,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `|tr ρ - 1|` limit on evolved states.
pub const TRACE_TOL: f64 = 1e-8;
/// `max |ρ - ρ†|` limit on evolved states.
pub const HERMITICITY_TOL: f64 = 1e-9;
/// Most negative eigenvalue tolerated on evolved states.
pub const MIN_EIGENVALUE_TOL: f64 = -1e-7;

/// `D[O]ρ = (2OρO† - O†Oρ - ρO†O) / 2`.
pub fn dissipator(op: &Operator, rho: &QuantumState) -> Result<CMatrix> {
    op.layout().ensure_same(&rho.layout())?;
    let o = op.matrix();
    let r = rho.density_matrix();
    let od = o.adjoint();
    let n = &od * o;
    Ok((o * &r * &od) - (&n * &r + &r * &n) * Complex64::new(0.5, 0.0))
}

/// Dense reference right-hand side `-i[H, ρ] + Σ D[L]ρ`.
pub fn lindblad_rhs(h: &Operator, noise: &NoiseSpec, rho: &QuantumState) -> Result<CMatrix> {
    h.layout().ensure_same(&rho.layout())?;
    let r = rho.density_matrix();
    let hm = h.matrix();
    let mut out = (hm * &r - &r * hm) * -I;
    for (_, l) in noise.collapse_operators(rho.layout()) {
        out += dissipator(&l, rho)?;
    }
    Ok(out)
}

/// Dense reference right-hand side for a time-dependent Hamiltonian.
pub fn lindblad_rhs_at(
    h: &TimeDependentHamiltonian,
    noise: &NoiseSpec,
    rho: &QuantumState,
    t: f64,
) -> Result<CMatrix> {
    lindblad_rhs(&h.at(t), noise, rho)
}

/// Sparse Lindblad generator on row-major density matrices.
///
/// With `H_eff = H(t) - (i/2) Σ L†L` the right-hand side is
/// `-i H_eff ρ + i ρ H_eff† + Σ L ρ L†`. For Hermitian ρ the second term is the
/// adjoint of the first, which halves the work.
enum Jump {
    Monomial(Monomial),
    General(SparseMatrix),
}

pub struct MasterEquation {
    layout: SpaceLayout,
    dim: usize,
    pattern: SparseMatrix,
    pattern_dag: SparseMatrix,
    constant: Vec<Complex64>,
    decay: Vec<Complex64>,
    rotating: Vec<(f64, Vec<Complex64>, Vec<Complex64>)>,
    jumps: Vec<Jump>,
    max_frequency: f64,
    hermitian: bool,
    x: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl MasterEquation {
    pub fn new(h: &TimeDependentHamiltonian, noise: &NoiseSpec) -> Result<Self> {
        let layout = h.layout();
        let dim = layout.dim();
        let collapse = noise.collapse_operators(layout);
        let mut j = CMatrix::zeros(dim, dim);
        for (_, l) in &collapse {
            j += l.matrix().adjoint() * l.matrix();
        }
        let j = SparseMatrix::from_dense(&j);
        let constant = h.constant().to_sparse();
        let mut parts = vec![constant.clone(), j.clone()];
        for term in h.rotating() {
            let x = term.op.to_sparse();
            parts.push(x.adjoint());
            parts.push(x);
        }
        let refs: Vec<&SparseMatrix> = parts.iter().collect();
        let pattern = SparseMatrix::union_pattern(&refs);
        let rotating = h
            .rotating()
            .iter()
            .map(|term| {
                let x = term.op.to_sparse();
                (term.frequency, x.values_on(&pattern), x.adjoint().values_on(&pattern))
            })
            .collect();
        let decay = j
            .values_on(&pattern)
            .into_iter()
            .map(|v| v * Complex64::new(0.0, -0.5))
            .collect();
        Ok(MasterEquation {
            layout,
            dim,
            constant: constant.values_on(&pattern),
            pattern_dag: pattern.clone(),
            pattern,
            decay,
            rotating,
            jumps: collapse
                .iter()
                .map(|(_, l)| {
                    let s = l.to_sparse();
                    match s.monomial() {
                        Some(m) => Jump::Monomial(m),
                        None => Jump::General(s),
                    }
                })
                .collect(),
            max_frequency: h.max_frequency(),
            hermitian: true,
            x: vec![ZERO; dim * dim],
            scratch: vec![ZERO; dim * dim],
        })
    }

    pub fn layout(&self) -> SpaceLayout {
        self.layout
    }

    pub fn max_frequency(&self) -> f64 {
        self.max_frequency
    }

    /// Whether inputs are taken to be Hermitian (the cheaper right-hand side).
    pub fn set_hermitian_input(&mut self, hermitian: bool) {
        self.hermitian = hermitian;
    }

    /// Fills `pattern` with `H_eff(t)` and `pattern_dag` with `H_eff(t)†`.
    fn load(&mut self, t: f64) {
        let vals = self.pattern.values_mut();
        vals.copy_from_slice(&self.constant);
        for (w, x, xd) in &self.rotating {
            let p = Complex64::from_polar(1.0, w * t);
            let pc = p.conj();
            for ((v, a), b) in vals.iter_mut().zip(x).zip(xd) {
                *v += a * p + b * pc;
            }
        }
        if !self.hermitian {
            let dag = self.pattern_dag.values_mut();
            for ((d, v), g) in dag.iter_mut().zip(vals.iter()).zip(&self.decay) {
                *d = v - g;
            }
        }
        for (v, g) in vals.iter_mut().zip(&self.decay) {
            *v += g;
        }
    }

    pub fn rhs(&mut self, t: f64, rho: &CMatrix) -> CMatrix {
        let y = to_row_major(rho);
        let mut dy = vec![ZERO; y.len()];
        self.eval(t, &y, &mut dy);
        from_row_major(self.dim, &dy)
    }

    /// Evolves a row-major density matrix (Hermitian or not) to `t_final`.
    pub fn evolve_raw(
        &mut self,
        rho0: &[Complex64],
        t_final: f64,
        spec: &IntegratorSpec,
        sample_times: &[f64],
    ) -> Result<(Vec<Complex64>, Vec<(f64, Vec<Complex64>)>, IntegrationStats)> {
        let max_step = spec.max_step_for(self.max_frequency);
        let out = integrate(self, rho0, 0.0, t_final, spec, max_step, sample_times)?;
        Ok((out.y, out.samples, out.stats))
    }
}

impl OdeSystem for MasterEquation {
    fn len(&self) -> usize {
        self.dim * self.dim
    }

    fn eval(&mut self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let n = self.dim;
        self.load(t);
        self.x.iter_mut().for_each(|v| *v = ZERO);
        self.pattern.mul_dense_add(y, &mut self.x, -I);
        if self.hermitian {
            hermitian_fold(&self.x, dy, n);
        } else {
            dy.copy_from_slice(&self.x);
            self.pattern_dag.right_mul_dense_add(y, dy, I);
        }
        for l in &self.jumps {
            match l {
                Jump::Monomial(m) => m.sandwich_add(y, dy),
                Jump::General(s) => s.sandwich_add(y, &mut self.scratch, dy),
            }
        }
    }
}

/// Trace, hermiticity and positivity of one evolved state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub time: f64,
    pub trace_deficit: f64,
    pub hermiticity_deficit: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    pub fn of(time: f64, rho: &CMatrix) -> Self {
        Diagnostics {
            time,
            trace_deficit: (rho.trace().re - 1.0).abs(),
            hermiticity_deficit: hermiticity_deficit(rho),
            min_eigenvalue: min_eigenvalue(rho),
        }
    }

    pub fn within_limits(&self) -> bool {
        self.trace_deficit < TRACE_TOL
            && self.hermiticity_deficit < HERMITICITY_TOL
            && self.min_eigenvalue >= MIN_EIGENVALUE_TOL
    }
}

#[derive(Clone, Debug)]
pub struct MasterEvolution {
    pub final_state: QuantumState,
    pub samples: Vec<(f64, QuantumState)>,
    /// One entry per sample, then one for the final state.
    pub diagnostics: Vec<Diagnostics>,
    pub stats: IntegrationStats,
}

/// Evolves `rho0` under `dρ/dt = -i[H(t), ρ] + Σ D[L]ρ` up to `t_final`.
pub fn evolve_master(
    rho0: &QuantumState,
    h: &TimeDependentHamiltonian,
    noise: &NoiseSpec,
    t_final: f64,
    spec: &IntegratorSpec,
    sample_times: &[f64],
) -> Result<MasterEvolution> {
    rho0.layout().ensure_same(&h.layout())?;
    if !(t_final >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "final time must be >= 0, got {t_final}"
        )));
    }
    let layout = rho0.layout();
    let r0 = rho0.density_matrix();
    let mut eq = MasterEquation::new(h, noise)?;
    eq.set_hermitian_input(hermiticity_deficit(&r0) <= 1e-12);
    let (y, samples, stats) = eq.evolve_raw(&to_row_major(&r0), t_final, spec, sample_times)?;
    let dim = layout.dim();
    let mut diagnostics = Vec::with_capacity(samples.len() + 1);
    let mut states = Vec::with_capacity(samples.len());
    for (t, s) in samples {
        let m = from_row_major(dim, &s);
        diagnostics.push(Diagnostics::of(t, &m));
        states.push((t, QuantumState::density(layout, m)?));
    }
    let m = from_row_major(dim, &y);
    diagnostics.push(Diagnostics::of(t_final, &m));
    Ok(MasterEvolution {
        final_state: QuantumState::density(layout, m)?,
        samples: states,
        diagnostics,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::noise::Channel;
    use crate::dynamics::unitary::evolve_unitary;
    use crate::model::{full_hamiltonian, ModelParams, UnitConvention};
    use crate::tensor::{coherent_state_with_tolerance, qutrit_state, CVector, Level};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn regime(n: usize) -> (ModelParams, SpaceLayout) {
        let mut p = ModelParams::from_dispersive(1.0, 115.0, 6.0, UnitConvention::Angular).unwrap();
        p.kappa_a = 1.0 / 15.0;
        p.kappa_b = 1.0 / 10.0;
        p.gamma_eg = 1.0 / 50.0;
        p.gamma_fe = 1.0 / 25.0;
        p.gamma_fg = 1.0 / 100.0;
        p.gamma_phi_e = 1.0 / 15.0;
        p.gamma_phi_f = 1.0 / 10.0;
        (p, SpaceLayout::symmetric(n).unwrap())
    }

    fn superposed_input(layout: SpaceLayout) -> QuantumState {
        let q = (qutrit_state(Level::G) * c(0.6)) + (qutrit_state(Level::F) * Complex64::new(0.0, 0.8));
        let a = coherent_state_with_tolerance(c(0.1), layout.fock_a(), 1e-3).unwrap();
        let b = coherent_state_with_tolerance(c(-0.1), layout.fock_b(), 1e-3).unwrap();
        QuantumState::product(layout, &q, &a, &b).unwrap()
    }

    #[test]
    fn identity_dissipator_vanishes() {
        let layout = SpaceLayout::symmetric(2).unwrap();
        let rho = superposed_input(layout).into_density();
        let d = dissipator(&Operator::identity(layout), &rho).unwrap();
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn single_photon_loss() {
        let layout = SpaceLayout::new(2, 1).unwrap();
        let rho = QuantumState::basis(layout, Level::G, 1, 0).unwrap().into_density();
        let d = dissipator(&Operator::cavity_a(layout), &rho).unwrap();
        let i0 = layout.index(Level::G, 0, 0);
        let i1 = layout.index(Level::G, 1, 0);
        assert_relative_eq!(d[(i0, i0)].re, 1.0);
        assert_relative_eq!(d[(i1, i1)].re, -1.0);
        assert_relative_eq!(d.norm(), 2f64.sqrt());
    }

    #[test]
    fn sparse_rhs_matches_dense_reference() {
        let (p, layout) = regime(3);
        let h = full_hamiltonian(&p, layout).unwrap();
        let noise = NoiseSpec::from_params(&p);
        let rho = superposed_input(layout).into_density();
        let t = 0.0377;
        let dense = lindblad_rhs_at(&h, &noise, &rho, t).unwrap();
        let mut eq = MasterEquation::new(&h, &noise).unwrap();
        let fast = eq.rhs(t, &rho.density_matrix());
        assert!((&fast - &dense).norm() < 1e-10 * dense.norm());
        eq.set_hermitian_input(false);
        let general = eq.rhs(t, &rho.density_matrix());
        assert!((&general - &dense).norm() < 1e-10 * dense.norm());
        // non-Hermitian input needs the general form
        let n = layout.dim();
        let x = CMatrix::from_fn(n, n, |i, j| Complex64::new((i + 2 * j) as f64 * 1e-3, (i * j % 5) as f64 * 1e-3));
        let hx = h.at(t).into_matrix();
        let mut want = (&hx * &x - &x * &hx) * -I;
        for (_, l) in noise.collapse_operators(layout) {
            let l = l.matrix();
            let ld = l.adjoint();
            want += l * &x * &ld - (&ld * l * &x + &x * &ld * l) * c(0.5);
        }
        let got = eq.rhs(t, &x);
        assert!((&got - &want).norm() < 1e-10 * want.norm());
        assert!(dense.trace().norm() < 1e-10);
        assert!(crate::tensor::hermiticity_deficit(&dense) < 1e-9);
    }

    #[test]
    fn vacuum_is_fixed_under_cavity_loss() {
        let layout = SpaceLayout::symmetric(3).unwrap();
        let noise = NoiseSpec::none().with_rate(Channel::CavityA, 0.3).unwrap();
        let h = TimeDependentHamiltonian::constant_only(Operator::zeros(layout));
        let rho = QuantumState::basis(layout, Level::G, 0, 0).unwrap().into_density();
        let rhs = lindblad_rhs(h.constant(), &noise, &rho).unwrap();
        assert!(rhs.norm() < 1e-15);
    }

    #[test]
    fn photon_number_decays_exponentially() {
        let layout = SpaceLayout::new(10, 1).unwrap();
        let kappa = 0.7;
        let noise = NoiseSpec::none().with_rate(Channel::CavityA, kappa).unwrap();
        let h = TimeDependentHamiltonian::constant_only(Operator::zeros(layout));
        let a = coherent_state_with_tolerance(c(1.2), 10, 1e-5).unwrap();
        let rho0 = QuantumState::product(layout, &qutrit_state(Level::G), &a, &CVector::from_element(1, c(1.0)))
            .unwrap()
            .into_density();
        let number = {
            let op = Operator::cavity_a(layout);
            op.adjoint().compose(&op).unwrap()
        };
        let n0 = rho0.expectation(&number).unwrap().re;
        let times = [0.5, 1.0, 2.0];
        let out = evolve_master(&rho0, &h, &noise, 3.0, &IntegratorSpec::default(), &times).unwrap();
        for (t, st) in &out.samples {
            let n = st.expectation(&number).unwrap().re;
            assert_relative_eq!(n, n0 * (-kappa * t).exp(), max_relative = 1e-7);
        }
        assert!(out.diagnostics.iter().all(|d| d.within_limits()));
    }

    #[test]
    fn zero_time_returns_input() {
        let (p, layout) = regime(2);
        let h = full_hamiltonian(&p, layout).unwrap();
        let rho = superposed_input(layout).into_density();
        let out = evolve_master(&rho, &h, &NoiseSpec::from_params(&p), 0.0, &IntegratorSpec::default(), &[]).unwrap();
        assert_eq!(out.final_state, rho);
    }

    #[test]
    fn noiseless_master_matches_unitary() {
        let (p, layout) = regime(3);
        let h = full_hamiltonian(&p, layout).unwrap();
        let psi = superposed_input(layout);
        let spec = IntegratorSpec::default().with_rel_tol(1e-10);
        let t = 0.25;
        let pure = evolve_unitary(&psi, &h, t, &spec).unwrap();
        let mixed = evolve_master(&psi.clone().into_density(), &h, &NoiseSpec::none(), t, &spec, &[]).unwrap();
        let diff = (mixed.final_state.density_matrix() - pure.density_matrix()).camax();
        assert!(diff < 1e-8, "max-norm difference {diff}");
    }

    #[test]
    fn evolution_is_linear() {
        let (p, layout) = regime(2);
        let h = full_hamiltonian(&p, layout).unwrap();
        let noise = NoiseSpec::from_params(&p);
        let spec = IntegratorSpec::default();
        let r1 = superposed_input(layout).into_density();
        let r2 = QuantumState::basis(layout, Level::E, 1, 0).unwrap().into_density();
        let w = 0.37;
        let mix = QuantumState::density(layout, r1.density_matrix() * c(w) + r2.density_matrix() * c(1.0 - w)).unwrap();
        let t = 0.2;
        let e1 = evolve_master(&r1, &h, &noise, t, &spec, &[]).unwrap().final_state.density_matrix();
        let e2 = evolve_master(&r2, &h, &noise, t, &spec, &[]).unwrap().final_state.density_matrix();
        let em = evolve_master(&mix, &h, &noise, t, &spec, &[]).unwrap().final_state.density_matrix();
        assert!((em - (e1 * c(w) + e2 * c(1.0 - w))).camax() < 1e-8);
    }

    proptest! {
        #[test]
        fn dissipator_is_traceless(vals in proptest::collection::vec(-1.0f64..1.0, 4 * 18 * 18)) {
            let layout = SpaceLayout::new(3, 2).unwrap();
            let n = layout.dim();
            let o = CMatrix::from_fn(n, n, |i, j| Complex64::new(vals[i * n + j], vals[n * n + i * n + j]));
            let g = CMatrix::from_fn(n, n, |i, j| Complex64::new(vals[2 * n * n + i * n + j], vals[3 * n * n + i * n + j]));
            let rho = &g * g.adjoint();
            let rho = &rho / rho.trace();
            let d = dissipator(&Operator::new(layout, o).unwrap(), &QuantumState::density(layout, rho).unwrap()).unwrap();
            prop_assert!(d.trace().norm() < 1e-12);
        }
    }
}
