use nalgebra::DVector;
use num_complex::Complex64;

use super::layout::{Level, Slot, SpaceLayout};
use super::operator::{hermiticity_deficit, CMatrix, Operator};
use crate::error::{Error, Result};

pub type CVector = DVector<Complex64>;

/// Default bound on the discarded coherent-state population.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// Slack allowed on `<psi|rho|psi>` outside `[0, 1]` before it is an error.
pub const POSITIVITY_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum StateRepr {
    Pure(CVector),
    Density(CMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    layout: SpaceLayout,
    repr: StateRepr,
}

impl QuantumState {
    pub fn pure(layout: SpaceLayout, vector: CVector) -> Result<Self> {
        if vector.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: vector.len(),
            });
        }
        Ok(QuantumState {
            layout,
            repr: StateRepr::Pure(vector),
        })
    }

    pub fn density(layout: SpaceLayout, matrix: CMatrix) -> Result<Self> {
        let dim = layout.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(QuantumState {
            layout,
            repr: StateRepr::Density(matrix),
        })
    }

    /// `|qutrit> ⊗ |a> ⊗ |b>`.
    pub fn product(layout: SpaceLayout, qutrit: &CVector, a: &CVector, b: &CVector) -> Result<Self> {
        for (v, slot) in [(qutrit, Slot::Qutrit), (a, Slot::CavityA), (b, Slot::CavityB)] {
            let d = layout.slot_dim(slot);
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
        }
        Self::pure(layout, qutrit.kronecker(a).kronecker(b))
    }

    pub fn basis(layout: SpaceLayout, level: Level, n: usize, m: usize) -> Result<Self> {
        if n >= layout.fock_a() || m >= layout.fock_b() {
            return Err(Error::InvalidParameter(format!(
                "Fock index ({n}, {m}) outside layout {layout}"
            )));
        }
        let mut v = CVector::zeros(layout.dim());
        v[layout.index(level, n, m)] = Complex64::new(1.0, 0.0);
        Self::pure(layout, v)
    }

    pub fn layout(&self) -> SpaceLayout {
        self.layout
    }

    pub fn repr(&self) -> &StateRepr {
        &self.repr
    }

    pub fn as_pure(&self) -> Option<&CVector> {
        match &self.repr {
            StateRepr::Pure(v) => Some(v),
            StateRepr::Density(_) => None,
        }
    }

    pub fn is_pure_repr(&self) -> bool {
        matches!(self.repr, StateRepr::Pure(_))
    }

    pub fn density_matrix(&self) -> CMatrix {
        match &self.repr {
            StateRepr::Pure(v) => v * v.adjoint(),
            StateRepr::Density(m) => m.clone(),
        }
    }

    pub fn into_density(self) -> Self {
        let m = self.density_matrix();
        QuantumState {
            layout: self.layout,
            repr: StateRepr::Density(m),
        }
    }

    /// Squared norm for vectors, trace for density matrices.
    pub fn trace(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(v) => v.norm_squared(),
            StateRepr::Density(m) => m.trace().re,
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(Error::EmptyBranch(t));
        }
        let repr = match &self.repr {
            StateRepr::Pure(v) => StateRepr::Pure(v / Complex64::new(t.sqrt(), 0.0)),
            StateRepr::Density(m) => StateRepr::Density(m / Complex64::new(t, 0.0)),
        };
        Ok(QuantumState {
            layout: self.layout,
            repr,
        })
    }

    pub fn hermiticity_deficit(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(_) => 0.0,
            StateRepr::Density(m) => hermiticity_deficit(m),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(_) => 0.0,
            StateRepr::Density(m) => min_eigenvalue(m),
        }
    }

    /// `tr(op rho)` or `<psi|op|psi>`.
    pub fn expectation(&self, op: &Operator) -> Result<Complex64> {
        self.layout.ensure_same(&op.layout())?;
        Ok(match &self.repr {
            StateRepr::Pure(v) => v.dotc(&(op.matrix() * v)),
            StateRepr::Density(m) => (op.matrix() * m).trace(),
        })
    }

    /// `op |psi>` or `op rho op^dagger`.
    pub fn apply(&self, op: &Operator) -> Result<Self> {
        self.layout.ensure_same(&op.layout())?;
        let repr = match &self.repr {
            StateRepr::Pure(v) => StateRepr::Pure(op.matrix() * v),
            StateRepr::Density(m) => StateRepr::Density(op.matrix() * m * op.matrix().adjoint()),
        };
        Ok(QuantumState {
            layout: self.layout,
            repr,
        })
    }
}

/// Smallest eigenvalue of a Hermitian matrix (the anti-Hermitian part is ignored).
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Population that a `dim`-level truncation discards from `|alpha>`.
pub fn coherent_tail(amplitude: f64, dim: usize) -> f64 {
    let x = amplitude * amplitude;
    if x == 0.0 {
        return if dim == 0 { 1.0 } else { 0.0 };
    }
    // p_n = e^{-x} x^n / n!, summed from n = dim upward
    let mut p = (-x).exp();
    for n in 1..=dim {
        p *= x / n as f64;
    }
    let mut tail = 0.0;
    let mut n = dim;
    while p > 0.0 && (p > tail * 1e-18 || (n as f64) < x) {
        tail += p;
        n += 1;
        p *= x / n as f64;
    }
    tail
}

pub fn coherent_state(amplitude: Complex64, dim: usize) -> Result<CVector> {
    coherent_state_with_tolerance(amplitude, dim, DEFAULT_TAIL_TOLERANCE)
}

/// Truncated coherent state, renormalized after truncation.
pub fn coherent_state_with_tolerance(amplitude: Complex64, dim: usize, tol: f64) -> Result<CVector> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    let r = amplitude.norm();
    let tail = coherent_tail(r, dim);
    if tail >= tol {
        let mut minimal_dim = dim + 1;
        while coherent_tail(r, minimal_dim) >= tol {
            minimal_dim += 1;
        }
        return Err(Error::TruncationTooSmall {
            amplitude: r,
            dim,
            minimal_dim,
            tail,
        });
    }
    let mut v = CVector::zeros(dim);
    let mut c = Complex64::new((-0.5 * r * r).exp(), 0.0);
    for n in 0..dim {
        v[n] = c;
        c = c * amplitude / ((n + 1) as f64).sqrt();
    }
    let norm = v.norm();
    Ok(v / Complex64::new(norm, 0.0))
}

pub fn fock_state(n: usize, dim: usize) -> Result<CVector> {
    if n >= dim {
        return Err(Error::InvalidParameter(format!(
            "Fock level {n} outside truncation {dim}"
        )));
    }
    let mut v = CVector::zeros(dim);
    v[n] = Complex64::new(1.0, 0.0);
    Ok(v)
}

/// Qutrit basis vector.
pub fn qutrit_state(level: Level) -> CVector {
    let mut v = CVector::zeros(3);
    v[level.index()] = Complex64::new(1.0, 0.0);
    v
}

/// `sqrt(<psi|rho|psi>)` for a pure target.
pub fn fidelity(target: &QuantumState, rho: &QuantumState) -> Result<f64> {
    target.layout.ensure_same(&rho.layout)?;
    let psi = target.as_pure().ok_or_else(|| {
        Error::InvalidParameter("fidelity target must be a pure state".into())
    })?;
    let overlap = match &rho.repr {
        StateRepr::Pure(phi) => psi.dotc(phi).norm_sqr(),
        StateRepr::Density(m) => psi.dotc(&(m * psi)).re,
    };
    clamp_probability(overlap).map(f64::sqrt)
}

pub(crate) fn clamp_probability(x: f64) -> Result<f64> {
    if !x.is_finite() || x < -POSITIVITY_SLACK || x > 1.0 + POSITIVITY_SLACK {
        return Err(Error::Positivity(x));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Density matrix on a subset of the tensor factors.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    slots: Vec<Slot>,
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl ReducedState {
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }
}

/// Traces out every factor not listed in `keep`. Kept factors stay in layout order.
pub fn partial_trace(state: &QuantumState, keep: &[Slot]) -> Result<ReducedState> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let layout = state.layout;
    let dims = layout.slot_dims();
    let mut kept = [false; 3];
    for s in keep {
        kept[SpaceLayout::slot_position(*s)] = true;
    }
    let slots: Vec<Slot> = Slot::ALL
        .iter()
        .copied()
        .filter(|s| kept[SpaceLayout::slot_position(*s)])
        .collect();
    let red_dims: Vec<usize> = slots
        .iter()
        .map(|s| dims[SpaceLayout::slot_position(*s)])
        .collect();
    let red_dim: usize = red_dims.iter().product();

    let split = |idx: usize| -> (usize, usize) {
        let (q, n, m) = layout.decompose(idx);
        let digits = [q, n, m];
        let mut k = 0;
        let mut t = 0;
        for p in 0..3 {
            if kept[p] {
                k = k * dims[p] + digits[p];
            } else {
                t = t * dims[p] + digits[p];
            }
        }
        (k, t)
    };

    let rho = state.density_matrix();
    let dim = layout.dim();
    let keys: Vec<(usize, usize)> = (0..dim).map(split).collect();
    let mut out = CMatrix::zeros(red_dim, red_dim);
    for i in 0..dim {
        let (ki, ti) = keys[i];
        for j in 0..dim {
            let (kj, tj) = keys[j];
            if ti == tj {
                out[(ki, kj)] += rho[(i, j)];
            }
        }
    }
    Ok(ReducedState {
        slots,
        dims: red_dims,
        matrix: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::operator::number;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn vacuum_and_mean_photon() {
        let v = coherent_state(c(0.0), 5).unwrap();
        assert_relative_eq!(v[0].re, 1.0);
        let v = coherent_state(c(0.1), 8).unwrap();
        let n = number(8).unwrap();
        let mean = v.dotc(&(&n * &v)).re;
        assert_relative_eq!(mean, 0.01, epsilon = 1e-10);
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn opposite_coherent_overlap() {
        let p = coherent_state(c(0.1), 8).unwrap();
        let m = coherent_state(c(-0.1), 8).unwrap();
        assert_relative_eq!(p.dotc(&m).re, 0.980199, epsilon = 1e-6);
        assert_relative_eq!(p.dotc(&m).re, (-0.02f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn truncation_error_names_minimal_dim() {
        match coherent_state(c(2.0), 4) {
            Err(Error::TruncationTooSmall { minimal_dim, .. }) => {
                assert!(coherent_tail(2.0, minimal_dim) < DEFAULT_TAIL_TOLERANCE);
                assert!(coherent_tail(2.0, minimal_dim - 1) >= DEFAULT_TAIL_TOLERANCE);
                assert!(coherent_state(c(2.0), minimal_dim).is_ok());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tail_matches_complement() {
        let x: f64 = 1.3;
        let mut head = 0.0;
        let mut p = (-x * x).exp();
        for n in 0..6 {
            head += p;
            p *= x * x / (n + 1) as f64;
        }
        assert_relative_eq!(coherent_tail(x, 6), 1.0 - head, epsilon = 1e-14);
    }

    #[test]
    fn fidelity_mixture() {
        let layout = SpaceLayout::symmetric(2).unwrap();
        let psi = QuantumState::basis(layout, Level::G, 0, 0).unwrap();
        let phi = QuantumState::basis(layout, Level::E, 1, 0).unwrap();
        let rho = psi.density_matrix() * c(0.5) + phi.density_matrix() * c(0.5);
        let rho = QuantumState::density(layout, rho).unwrap();
        assert_relative_eq!(fidelity(&psi, &rho).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(fidelity(&psi, &psi).unwrap(), 1.0);
        assert_relative_eq!(fidelity(&psi, &phi.clone().into_density()).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_rejects_negative_overlap() {
        let layout = SpaceLayout::symmetric(2).unwrap();
        let psi = QuantumState::basis(layout, Level::G, 0, 0).unwrap();
        let rho = psi.density_matrix() * c(-1e-6);
        let rho = QuantumState::density(layout, rho).unwrap();
        assert!(matches!(fidelity(&psi, &rho), Err(Error::Positivity(_))));
        let rho = psi.density_matrix() * c(-1e-10);
        let rho = QuantumState::density(layout, rho).unwrap();
        assert_eq!(fidelity(&psi, &rho).unwrap(), 0.0);
    }

    #[test]
    fn bell_like_reduction() {
        let layout = SpaceLayout::new(2, 1).unwrap();
        let mut v = CVector::zeros(layout.dim());
        v[layout.index(Level::G, 0, 0)] = c(0.5f64.sqrt());
        v[layout.index(Level::E, 1, 0)] = c(0.5f64.sqrt());
        let st = QuantumState::pure(layout, v).unwrap();
        let red = partial_trace(&st, &[Slot::CavityA]).unwrap();
        assert_relative_eq!(red.matrix()[(0, 0)].re, 0.5);
        assert_relative_eq!(red.matrix()[(1, 1)].re, 0.5);
        assert_relative_eq!(red.matrix()[(0, 1)].norm(), 0.0);
        assert!(matches!(partial_trace(&st, &[]), Err(Error::EmptyKeepSet)));
    }

    #[test]
    fn product_reduction_recovers_factor() {
        let layout = SpaceLayout::new(3, 2).unwrap();
        let q = (qutrit_state(Level::G) + qutrit_state(Level::F)) / c(2f64.sqrt());
        let a = coherent_state_with_tolerance(Complex64::new(0.3, 0.2), 3, 1e-2).unwrap();
        let b = fock_state(1, 2).unwrap();
        let st = QuantumState::product(layout, &q, &a, &b).unwrap();
        let red = partial_trace(&st, &[Slot::CavityA]).unwrap();
        assert_relative_eq!((red.matrix() - &a * a.adjoint()).norm(), 0.0, epsilon = 1e-14);
        let red = partial_trace(&st, &[Slot::CavityB, Slot::Qutrit]).unwrap();
        assert_eq!(red.slots(), &[Slot::Qutrit, Slot::CavityB]);
        let expect = (&q * q.adjoint()).kronecker(&(&b * b.adjoint()));
        assert_relative_eq!((red.matrix() - expect).norm(), 0.0, epsilon = 1e-14);
    }

    fn random_density(seed: &[f64], dim: usize) -> CMatrix {
        let g = CMatrix::from_fn(dim, dim, |i, j| {
            let k = (i * dim + j) * 2;
            Complex64::new(seed[k % seed.len()], seed[(k + 1) % seed.len()])
        });
        let rho = &g * g.adjoint();
        let t = rho.trace();
        rho / t
    }

    proptest! {
        #[test]
        fn partial_trace_preserves_trace_and_positivity(
            seed in proptest::collection::vec(-1.0f64..1.0, 16..64),
            mask in 1usize..8,
        ) {
            let layout = SpaceLayout::new(2, 2).unwrap();
            let rho = random_density(&seed, layout.dim());
            let st = QuantumState::density(layout, rho).unwrap();
            let keep: Vec<Slot> = Slot::ALL
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| *s)
                .collect();
            let red = partial_trace(&st, &keep).unwrap();
            prop_assert!((red.trace() - st.trace()).abs() < 1e-10);
            prop_assert!(red.min_eigenvalue() >= -1e-10);
        }

        #[test]
        fn self_fidelity_is_one(re in proptest::collection::vec(-1.0f64..1.0, 24), im in proptest::collection::vec(-1.0f64..1.0, 24)) {
            let layout = SpaceLayout::new(2, 4).unwrap();
            let v = CVector::from_fn(24, |i, _| Complex64::new(re[i], im[i]));
            prop_assume!(v.norm() > 1e-3);
            let st = QuantumState::pure(layout, v).unwrap().normalized().unwrap();
            let rho = st.clone().into_density();
            prop_assert!((fidelity(&st, &rho).unwrap() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn embed_is_multiplicative(re in proptest::collection::vec(-1.0f64..1.0, 18)) {
            let layout = SpaceLayout::new(3, 2).unwrap();
            let x = CMatrix::from_fn(3, 3, |i, j| Complex64::new(re[i * 3 + j], re[9 + i * 3 + j]));
            let y = x.adjoint() * c(0.7);
            for slot in [Slot::Qutrit, Slot::CavityA] {
                let lhs = Operator::embed(&(&x * &y), slot, layout).unwrap();
                let rhs = Operator::embed(&x, slot, layout).unwrap()
                    .compose(&Operator::embed(&y, slot, layout).unwrap()).unwrap();
                prop_assert!((lhs.matrix() - rhs.matrix()).camax() < 1e-13);
            }
        }
    }

    #[test]
    fn embedded_number_trace() {
        let layout = SpaceLayout::new(5, 3).unwrap();
        let n = Operator::embed(&number(5).unwrap(), Slot::CavityA, layout).unwrap();
        assert_relative_eq!(n.trace().re, (3 * 3 * (0..5).sum::<usize>()) as f64);
        let id = Operator::embed(&CMatrix::identity(3, 3), Slot::Qutrit, layout).unwrap();
        assert_eq!(id, Operator::identity(layout));
    }
}
