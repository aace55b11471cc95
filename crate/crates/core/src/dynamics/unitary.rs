use num_complex::Complex64;

use super::integrator::{integrate, IntegrationStats, IntegratorSpec, OdeSystem};
use crate::error::{Error, Result};
use crate::model::TimeDependentHamiltonian;
use crate::tensor::{CMatrix, CVector, Operator, QuantumState, SparseMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Norm slack accepted on the initial state of a unitary evolution.
pub const NORM_TOL: f64 = 1e-9;

/// `dψ/dt = -i H(t) ψ` with sparse `H(t)`.
struct Schrodinger {
    pattern: SparseMatrix,
    constant: Vec<Complex64>,
    rotating: Vec<(f64, Vec<Complex64>, Vec<Complex64>)>,
}

impl Schrodinger {
    fn new(h: &TimeDependentHamiltonian) -> Self {
        let constant = h.constant().to_sparse();
        let mut parts = vec![constant.clone()];
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
        Schrodinger {
            constant: constant.values_on(&pattern),
            pattern,
            rotating,
        }
    }
}

impl OdeSystem for Schrodinger {
    fn len(&self) -> usize {
        self.pattern.dim()
    }

    fn eval(&mut self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        let vals = self.pattern.values_mut();
        vals.copy_from_slice(&self.constant);
        for (w, x, xd) in &self.rotating {
            let p = Complex64::from_polar(1.0, w * t);
            let pc = p.conj();
            for ((v, a), b) in vals.iter_mut().zip(x).zip(xd) {
                *v += a * p + b * pc;
            }
        }
        dy.iter_mut().for_each(|v| *v = ZERO);
        self.pattern.mul_vec_add(y, dy);
        for v in dy.iter_mut() {
            *v *= Complex64::new(0.0, -1.0);
        }
    }
}

/// Integrates the Schrödinger equation for a normalized pure state.
pub fn evolve_unitary(
    psi0: &QuantumState,
    h: &TimeDependentHamiltonian,
    t_final: f64,
    spec: &IntegratorSpec,
) -> Result<QuantumState> {
    evolve_unitary_with_stats(psi0, h, t_final, spec).map(|(s, _)| s)
}

pub fn evolve_unitary_with_stats(
    psi0: &QuantumState,
    h: &TimeDependentHamiltonian,
    t_final: f64,
    spec: &IntegratorSpec,
) -> Result<(QuantumState, IntegrationStats)> {
    psi0.layout().ensure_same(&h.layout())?;
    let psi = psi0.as_pure().ok_or_else(|| {
        Error::InvalidParameter("unitary evolution needs a pure state".into())
    })?;
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidParameter(format!(
            "initial state norm {norm} is not 1"
        )));
    }
    let mut sys = Schrodinger::new(h);
    let max_step = spec.max_step_for(h.max_frequency());
    let y0: Vec<Complex64> = psi.iter().copied().collect();
    let out = integrate(&mut sys, &y0, 0.0, t_final, spec, max_step, &[])?;
    let state = QuantumState::pure(psi0.layout(), CVector::from_vec(out.y))?;
    Ok((state, out.stats))
}

/// `exp(-i H t)` from the Hermitian eigendecomposition.
pub fn propagator(h: &Operator, t: f64) -> CMatrix {
    let m = h.matrix();
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
    v * phases * v.adjoint()
}

/// Exact evolution of a pure or mixed state under a time-independent `h`.
pub fn evolve_exact(state: &QuantumState, h: &Operator, t: f64) -> Result<QuantumState> {
    state.layout().ensure_same(&h.layout())?;
    let u = Operator::new(h.layout(), propagator(h, t))?;
    state.apply(&u)
}
