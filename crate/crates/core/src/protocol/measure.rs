use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Variant;
use crate::oracle::Sign;
use crate::tensor::{CMatrix, CVector, Level, Operator, QuantumState, SpaceLayout, StateRepr};

/// Smallest probability a measurement branch may have.
pub const MIN_BRANCH_PROB: f64 = 1e-12;

/// The two ideal qutrit pulses used before readout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    /// `|f⟩ → |e⟩`, `|e⟩ → -|f⟩`.
    PiEf,
    /// `|g⟩ → (|e⟩+|g⟩)/√2`, `|e⟩ → (|e⟩-|g⟩)/√2`.
    HalfPiGe,
}

impl Rotation {
    /// 3×3 real orthogonal matrix on the qutrit.
    pub fn qutrit_matrix(self) -> CMatrix {
        let (g, e, f) = (Level::G.index(), Level::E.index(), Level::F.index());
        let mut m = CMatrix::zeros(3, 3);
        let r = |x: f64| Complex64::new(x, 0.0);
        match self {
            Rotation::PiEf => {
                m[(g, g)] = r(1.0);
                m[(e, f)] = r(1.0);
                m[(f, e)] = r(-1.0);
            }
            Rotation::HalfPiGe => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                m[(g, g)] = r(h);
                m[(e, g)] = r(h);
                m[(g, e)] = r(-h);
                m[(e, e)] = r(h);
                m[(f, f)] = r(1.0);
            }
        }
        m
    }
}

pub fn qutrit_rotation(kind: Rotation, layout: SpaceLayout) -> Operator {
    let id_a = CMatrix::identity(layout.fock_a(), layout.fock_a());
    let id_b = CMatrix::identity(layout.fock_b(), layout.fock_b());
    Operator::product(&kind.qutrit_matrix(), &id_a, &id_b, layout).expect("dimensions match layout")
}

/// Pulses applied before the qutrit readout, in order.
pub fn rotation_sequence(variant: Variant) -> &'static [Rotation] {
    match variant.auxiliary() {
        Level::E => &[Rotation::PiEf, Rotation::HalfPiGe],
        _ => &[Rotation::HalfPiGe],
    }
}

pub fn apply_rotations(state: &QuantumState, variant: Variant) -> Result<QuantumState> {
    let mut out = state.clone();
    for r in rotation_sequence(variant) {
        out = out.apply(&qutrit_rotation(*r, state.layout()))?;
    }
    Ok(out)
}

/// Readout level of each outcome: `+` is `|e⟩`, `−` is `|g⟩`.
pub fn outcome_level(branch: Sign) -> Level {
    match branch {
        Sign::Plus => Level::E,
        Sign::Minus => Level::G,
    }
}

fn level_population(state: &QuantumState, level: Level) -> f64 {
    let layout = state.layout();
    let block = layout.fock_a() * layout.fock_b();
    let start = level.index() * block;
    match state.repr() {
        StateRepr::Pure(v) => v.rows(start, block).norm_squared(),
        StateRepr::Density(m) => (start..start + block).map(|i| m[(i, i)].re).sum(),
    }
}

/// Probabilities of the `+` and `−` outcomes.
pub fn outcome_probabilities(state: &QuantumState) -> (f64, f64) {
    (
        level_population(state, outcome_level(Sign::Plus)),
        level_population(state, outcome_level(Sign::Minus)),
    )
}

/// Projects the qutrit onto the readout level of `branch`; returns the
/// normalized conditional state and the branch probability.
pub fn measure_qutrit(state: &QuantumState, branch: Sign) -> Result<(QuantumState, f64)> {
    let layout = state.layout();
    let level = outcome_level(branch);
    let p = level_population(state, level);
    if !(p >= MIN_BRANCH_PROB) {
        return Err(Error::EmptyBranch(p));
    }
    let block = layout.fock_a() * layout.fock_b();
    let start = level.index() * block;
    let keep = |i: usize| i >= start && i < start + block;
    let projected = match state.repr() {
        StateRepr::Pure(v) => {
            let w = CVector::from_fn(v.len(), |i, _| if keep(i) { v[i] } else { Complex64::new(0.0, 0.0) });
            QuantumState::pure(layout, w / Complex64::new(p.sqrt(), 0.0))?
        }
        StateRepr::Density(m) => {
            let n = m.nrows();
            let w = CMatrix::from_fn(n, n, |i, j| {
                if keep(i) && keep(j) {
                    m[(i, j)] / p
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            QuantumState::density(layout, w)?
        }
    };
    Ok((projected, p))
}

/// Projects cavity B onto `reference` and traces out the qutrit.
///
/// Returns the normalized density matrix of cavity A and the projection probability.
pub fn measure_cavity_reference(state: &QuantumState, reference: &CVector) -> Result<(CMatrix, f64)> {
    let layout = state.layout();
    let (na, nb) = (layout.fock_a(), layout.fock_b());
    if reference.len() != nb {
        return Err(Error::DimensionMismatch {
            expected: nb,
            found: reference.len(),
        });
    }
    let mut rho_a = CMatrix::zeros(na, na);
    match state.repr() {
        StateRepr::Pure(v) => {
            for q in 0..SpaceLayout::QUTRIT_DIM {
                let a = CVector::from_fn(na, |n, _| {
                    (0..nb)
                        .map(|m| reference[m].conj() * v[(q * na + n) * nb + m])
                        .sum()
                });
                rho_a += &a * a.adjoint();
            }
        }
        StateRepr::Density(m) => {
            // rho_A = Σ_q <χ| ρ_qq |χ>
            for q in 0..SpaceLayout::QUTRIT_DIM {
                let base = q * na * nb;
                for n in 0..na {
                    for n2 in 0..na {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for mb in 0..nb {
                            let left = reference[mb].conj();
                            let row = base + n * nb + mb;
                            for mb2 in 0..nb {
                                let col = base + n2 * nb + mb2;
                                acc += left * m[(row, col)] * reference[mb2];
                            }
                        }
                        rho_a[(n, n2)] += acc;
                    }
                }
            }
        }
    }
    let p = rho_a.trace().re;
    if !(p >= MIN_BRANCH_PROB) {
        return Err(Error::EmptyBranch(p));
    }
    Ok((rho_a / Complex64::new(p, 0.0), p))
}

/// `⟨v|ρ|v⟩` for a single-mode density matrix.
pub fn mode_overlap(rho: &CMatrix, v: &CVector) -> f64 {
    v.dotc(&(rho * v)).re
}
