use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::ModelParams;
use super::shifts::DispersiveShifts;
use crate::error::{Error, Result};
use crate::tensor::{annihilation, projector, CMatrix, Level, Operator, SpaceLayout};

/// `e^{iωt} X + e^{-iωt} X†`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotatingTerm {
    pub op: Operator,
    pub frequency: f64,
}

/// `H(t) = H_0 + Σ_k (e^{iω_k t} X_k + h.c.)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeDependentHamiltonian {
    constant: Operator,
    rotating: Vec<RotatingTerm>,
}

impl TimeDependentHamiltonian {
    pub fn new(constant: Operator, rotating: Vec<RotatingTerm>) -> Result<Self> {
        for term in &rotating {
            constant.layout().ensure_same(&term.op.layout())?;
        }
        Ok(TimeDependentHamiltonian { constant, rotating })
    }

    pub fn constant_only(constant: Operator) -> Self {
        TimeDependentHamiltonian {
            constant,
            rotating: Vec::new(),
        }
    }

    pub fn layout(&self) -> SpaceLayout {
        self.constant.layout()
    }

    pub fn constant(&self) -> &Operator {
        &self.constant
    }

    pub fn rotating(&self) -> &[RotatingTerm] {
        &self.rotating
    }

    /// Largest `|ω_k|`, zero when time-independent.
    pub fn max_frequency(&self) -> f64 {
        self.rotating
            .iter()
            .map(|t| t.frequency.abs())
            .fold(0.0, f64::max)
    }

    pub fn add_constant(&mut self, op: &Operator) -> Result<()> {
        self.constant = self.constant.try_add(op)?;
        Ok(())
    }

    pub fn at(&self, t: f64) -> Operator {
        let mut m = self.constant.matrix().clone();
        for term in &self.rotating {
            let phase = Complex64::from_polar(1.0, term.frequency * t);
            let x = term.op.matrix();
            m += x * phase + x.adjoint() * phase.conj();
        }
        Operator::new(self.layout(), m).expect("layout preserved")
    }
}

/// `(slope, offset)` of the block `slope (n_a + n_b + K) + offset` on qutrit level `level`.
pub fn block_coefficients(level: Level, shifts: &DispersiveShifts) -> (f64, f64) {
    match level {
        Level::G => (-shifts.chi, 0.0),
        Level::E => (shifts.big_lam, 2.0 * shifts.chi),
        Level::F => (shifts.lam, 2.0 * shifts.lam),
    }
}

/// Two-mode block Hamiltonian for one qutrit level, on `fock_a ⊗ fock_b`.
pub fn block_hamiltonian(level: Level, shifts: &DispersiveShifts, fock_a: usize, fock_b: usize) -> Result<CMatrix> {
    let a = annihilation(fock_a)?.kronecker(&CMatrix::identity(fock_b, fock_b));
    let b = CMatrix::identity(fock_a, fock_a).kronecker(&annihilation(fock_b)?);
    let (slope, offset) = block_coefficients(level, shifts);
    let n = a.adjoint() * &a + b.adjoint() * &b;
    let k = a.adjoint() * &b + &a * b.adjoint();
    let dim = fock_a * fock_b;
    let id = CMatrix::identity(dim, dim);
    Ok((n + k) * Complex64::new(slope, 0.0) + id * Complex64::new(offset, 0.0))
}

/// The symmetric dispersive Hamiltonian: each qutrit level drives its own
/// Stark shift plus a conditional beam splitter.
pub fn effective_hamiltonian(shifts: &DispersiveShifts, layout: SpaceLayout) -> Result<Operator> {
    let mut h = Operator::zeros(layout);
    for level in Level::ALL {
        let block = block_hamiltonian(level, shifts, layout.fock_a(), layout.fock_b())?;
        let full = projector(level).kronecker(&block);
        h = h.try_add(&Operator::new(layout, full)?)?;
    }
    Ok(h)
}

/// Treatment of `g_A ≠ g_B` by the effective Hamiltonian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymmetryPolicy {
    #[default]
    Reject,
    /// Replace both couplings by their mean.
    MeanCoupling,
}

pub fn effective_hamiltonian_for(
    params: &ModelParams,
    layout: SpaceLayout,
    policy: AsymmetryPolicy,
) -> Result<Operator> {
    let c = params.coupling_asymmetry;
    let g = if c == 1.0 {
        params.g
    } else {
        match policy {
            AsymmetryPolicy::Reject => return Err(Error::AsymmetricCoupling(c)),
            AsymmetryPolicy::MeanCoupling => 0.5 * (1.0 + c) * params.g,
        }
    };
    let shifts = DispersiveShifts::new(g, params.delta, params.anharm)?;
    let mut h = effective_hamiltonian(&shifts, layout)?;
    if params.g_ab != 0.0 {
        h = h.try_add(&crosstalk_hamiltonian(params.g_ab, layout)?)?;
    }
    Ok(h)
}

/// `g_AB (a†b + a b†)`, identity on the qutrit.
pub fn crosstalk_hamiltonian(g_ab: f64, layout: SpaceLayout) -> Result<Operator> {
    if g_ab < 0.0 || !g_ab.is_finite() {
        return Err(Error::InvalidParameter(format!("g_ab = {g_ab} must be >= 0")));
    }
    let a = Operator::cavity_a(layout);
    let b = Operator::cavity_b(layout);
    let k = a.adjoint().compose(&b)?.try_add(&a.compose(&b.adjoint())?)?;
    Ok(k.scale_real(g_ab))
}

/// Interaction-picture Hamiltonian with symmetric detunings, plus crosstalk.
///
/// `X_1 = (g_A a + g_B b) σ_eg⁺` rotates at `Δ`; `X_2 = √2 (g_A a + g_B b) σ_fe⁺` at `δ = Δ - α`.
pub fn full_hamiltonian(params: &ModelParams, layout: SpaceLayout) -> Result<TimeDependentHamiltonian> {
    let a = Operator::cavity_a(layout);
    let b = Operator::cavity_b(layout);
    let field = a.scale_real(params.g_a()).try_add(&b.scale_real(params.g_b()))?;
    let s_eg = Operator::qutrit(Level::G, Level::E, layout);
    let s_fe = Operator::qutrit(Level::E, Level::F, layout);
    let x1 = field.compose(&s_eg)?;
    let x2 = field.compose(&s_fe)?.scale_real(2f64.sqrt());
    let constant = crosstalk_hamiltonian(params.g_ab, layout)?;
    TimeDependentHamiltonian::new(
        constant,
        vec![
            RotatingTerm {
                op: x1,
                frequency: params.delta,
            },
            RotatingTerm {
                op: x2,
                frequency: params.small_delta(),
            },
        ],
    )
}

/// `a†a + b†b` on the full space.
pub fn total_photon_number(layout: SpaceLayout) -> Operator {
    let a = Operator::cavity_a(layout);
    let b = Operator::cavity_b(layout);
    let na = a.adjoint().compose(&a).expect("same layout");
    let nb = b.adjoint().compose(&b).expect("same layout");
    na.try_add(&nb).expect("same layout")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::UnitConvention;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn regime() -> (ModelParams, SpaceLayout) {
        let p = ModelParams::from_dispersive(1.0, 115.0, 6.0, UnitConvention::Cyclic).unwrap();
        (p, SpaceLayout::symmetric(4).unwrap())
    }

    #[test]
    fn level_blocks_match_closed_forms() {
        let (p, layout) = regime();
        let s = DispersiveShifts::from_params(&p).unwrap();
        let h = effective_hamiltonian(&s, layout).unwrap();
        let idx = |l, i, j| layout.index(l, i, j);
        // diagonal: Stark shifts
        assert_relative_eq!(h.matrix()[(idx(Level::G, 2, 1), idx(Level::G, 2, 1))].re, -3.0 * s.chi, epsilon = 1e-12);
        assert_relative_eq!(h.matrix()[(idx(Level::F, 1, 1), idx(Level::F, 1, 1))].re, 4.0 * s.lam, epsilon = 1e-12);
        assert_relative_eq!(
            h.matrix()[(idx(Level::E, 0, 3), idx(Level::E, 0, 3))].re,
            3.0 * s.big_lam + 2.0 * s.chi,
            epsilon = 1e-12
        );
        // beam splitter: <1,0| K |0,1> = 1
        assert_relative_eq!(h.matrix()[(idx(Level::G, 1, 0), idx(Level::G, 0, 1))].re, -s.chi, epsilon = 1e-12);
        assert_relative_eq!(h.matrix()[(idx(Level::F, 2, 0), idx(Level::F, 1, 1))].re, 2f64.sqrt() * s.lam, epsilon = 1e-12);
        // no qutrit mixing
        assert_eq!(h.matrix()[(idx(Level::G, 0, 0), idx(Level::E, 0, 0))], Complex64::new(0.0, 0.0));
        assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn effective_conserves_photon_number() {
        let (p, layout) = regime();
        let s = DispersiveShifts::from_params(&p).unwrap();
        let h = effective_hamiltonian(&s, layout).unwrap();
        let n = total_photon_number(layout);
        assert!(h.commutator(&n).unwrap().matrix().norm() < 1e-13 * h.matrix().norm().max(1.0));
    }

    #[test]
    fn asymmetric_policy() {
        let (mut p, layout) = regime();
        p.coupling_asymmetry = 0.9;
        assert!(matches!(
            effective_hamiltonian_for(&p, layout, AsymmetryPolicy::Reject),
            Err(Error::AsymmetricCoupling(_))
        ));
        assert!(effective_hamiltonian_for(&p, layout, AsymmetryPolicy::MeanCoupling).is_ok());
    }

    #[test]
    fn full_hamiltonian_elements() {
        let (p, layout) = regime();
        let h = full_hamiltonian(&p, layout).unwrap();
        let t = 0.0123;
        let ht = h.at(t);
        let f00 = layout.index(Level::F, 0, 0);
        let e10 = layout.index(Level::E, 1, 0);
        let want = Complex64::from_polar(2f64.sqrt() * p.g, p.small_delta() * t);
        assert_relative_eq!((ht.matrix()[(f00, e10)] - want).norm(), 0.0, epsilon = 1e-10);
        let e00 = layout.index(Level::E, 0, 0);
        let g01 = layout.index(Level::G, 0, 1);
        let want = Complex64::from_polar(p.g, p.delta * t);
        assert_relative_eq!((ht.matrix()[(e00, g01)] - want).norm(), 0.0, epsilon = 1e-10);
        // forbidden g <-> f
        let g00 = layout.index(Level::G, 0, 0);
        let f_10 = layout.index(Level::F, 1, 0);
        assert_eq!(ht.matrix()[(g00, f_10)].norm(), 0.0);
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let (mut p, layout) = regime();
        p.g = 0.0;
        let h = full_hamiltonian(&p, layout).unwrap();
        assert_eq!(h.at(0.7).matrix().norm(), 0.0);
    }

    #[test]
    fn crosstalk_properties() {
        let layout = SpaceLayout::symmetric(3).unwrap();
        assert_eq!(crosstalk_hamiltonian(0.0, layout).unwrap().matrix().norm(), 0.0);
        let h = crosstalk_hamiltonian(2.6268, layout).unwrap();
        let i = layout.index(Level::E, 1, 0);
        let j = layout.index(Level::E, 0, 1);
        assert_relative_eq!(h.matrix()[(i, j)].re, 2.6268);
        let n = total_photon_number(layout);
        assert!(h.commutator(&n).unwrap().matrix().norm() < 1e-13);
        assert!(crosstalk_hamiltonian(-1.0, layout).is_err());
    }

    proptest! {
        #[test]
        fn full_hamiltonian_hermitian(t in -10.0f64..10.0, c in 0.5f64..1.5, gab in 0.0f64..5.0) {
            let (mut p, _) = regime();
            p.coupling_asymmetry = c;
            p.g_ab = gab;
            let layout = SpaceLayout::new(3, 2).unwrap();
            let h = full_hamiltonian(&p, layout).unwrap();
            prop_assert!(h.at(t).hermiticity_deficit() < 1e-12);
        }
    }
}
