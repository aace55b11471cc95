use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase::conditional_phase_at;
use crate::error::{Error, Result};
use crate::model::{Scheme, Variant};
use crate::tensor::{CVector, Level, QuantumState, SpaceLayout};
use num_rational::Rational64;

/// Smallest `N²` for which the adder output is defined.
pub const MIN_NORM_SQ: f64 = 1e-14;

/// Relative sign between the two outputs of the adder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Which closed form the swapped branch follows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetConvention {
    /// `|φ⟩_A|ψ⟩_B` on the swapped branch.
    #[default]
    Nominal,
    /// `P|φ⟩_A P|ψ⟩_B` with photon parity `P = (-1)^n`, which is what the
    /// dispersive evolution actually produces.
    ParityCorrected,
}

/// Normalized output and `N² = ½ ‖unnormalized output‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdderOutput {
    pub state: CVector,
    pub norm_sq: f64,
}

/// `(w₁⟨χ|b₁⟩ a₁ + w₂⟨χ|b₂⟩ a₂)` normalized, for a post-selected two-branch state.
pub fn superpose_branches(
    branches: [(Complex64, &CVector, &CVector); 2],
    reference: &CVector,
) -> Result<AdderOutput> {
    let dim = branches[0].1.len();
    let mut out = CVector::zeros(dim);
    for (w, a, b) in branches {
        if a.len() != dim || b.len() != reference.len() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.len(),
            });
        }
        out += a * (w * reference.dotc(b));
    }
    let norm_sq = 0.5 * out.norm_squared();
    if norm_sq < MIN_NORM_SQ {
        return Err(Error::DestructiveInterference(norm_sq));
    }
    let norm = out.norm();
    Ok(AdderOutput {
        state: out / Complex64::new(norm, 0.0),
        norm_sq,
    })
}

/// `(γ|ψ⟩ ± η|φ⟩)/N` with `γ = α_T⟨χ|φ⟩`, `η = β_T⟨χ|ψ⟩`.
pub fn abstract_adder(
    psi: &CVector,
    phi: &CVector,
    alpha_t: Complex64,
    beta_t: Complex64,
    reference: &CVector,
    sign: Sign,
) -> Result<AdderOutput> {
    superpose_branches(
        [(alpha_t, psi, phi), (beta_t * sign.value(), phi, psi)],
        reference,
    )
}

/// `(-1)^n` applied to a single-mode state.
pub fn parity(v: &CVector) -> CVector {
    CVector::from_fn(v.len(), |n, _| if n % 2 == 0 { v[n] } else { -v[n] })
}

/// Relative sign of the partner branch in the nominal target.
pub fn nominal_sign(variant: Variant) -> Sign {
    match variant {
        Variant::EAuxGControl | Variant::FAuxEControl => Sign::Plus,
        Variant::EAuxFControl | Variant::FAuxGControl => Sign::Minus,
    }
}

fn ancilla_amplitudes(theta: f64) -> (Complex64, Complex64) {
    (Complex64::new(theta.sin(), 0.0), Complex64::new(theta.cos(), 0.0))
}

/// Cavity-A output of a scheme for the `branch` outcome of the qutrit
/// measurement and projection of B onto `reference`.
pub fn scheme_adder(
    variant: Variant,
    theta: f64,
    psi: &CVector,
    phi: &CVector,
    reference: &CVector,
    branch: Sign,
    convention: TargetConvention,
) -> Result<AdderOutput> {
    let (s, c) = ancilla_amplitudes(theta);
    let (sa, sb) = match convention {
        TargetConvention::Nominal => (phi.clone(), psi.clone()),
        TargetConvention::ParityCorrected => (parity(phi), parity(psi)),
    };
    let partner = c * nominal_sign(variant).times(branch).value();
    let ground_swaps = variant.swap_level() == Level::G;
    let (wg, ag, bg) = if ground_swaps { (s, &sa, &sb) } else { (s, psi, phi) };
    let (wx, ax, bx) = if ground_swaps { (partner, psi, phi) } else { (partner, &sa, &sb) };
    superpose_branches([(wg, ag, bg), (wx, ax, bx)], reference)
}

/// Pre-measurement state built branch by branch from the exact Fock maps at `Δ/α = r`.
pub fn exact_target(
    scheme: &Scheme,
    r: Rational64,
    theta: f64,
    psi: &CVector,
    phi: &CVector,
    layout: SpaceLayout,
) -> Result<QuantumState> {
    let (na, nb) = (layout.fock_a(), layout.fock_b());
    if psi.len() != na || phi.len() != nb {
        return Err(Error::DimensionMismatch {
            expected: na,
            found: psi.len(),
        });
    }
    let (s, c) = ancilla_amplitudes(theta);
    let mut out = CVector::zeros(layout.dim());
    for n in 0..na {
        for m in 0..nb {
            let amp = psi[n] * phi[m];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let maps = conditional_phase_at(scheme, r, n as u64, m as u64)?;
            for (map, w) in maps.iter().zip([s, c]) {
                let (pa, pb) = if map.swapped { (m, n) } else { (n, m) };
                if pa >= na || pb >= nb {
                    return Err(Error::InvalidParameter(format!(
                        "swapping |{n},{m}⟩ leaves the {layout} layout"
                    )));
                }
                out[layout.index(map.level, pa, pb)] += amp * w * map.phase.to_complex();
            }
        }
    }
    QuantumState::pure(layout, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{coherent_state, fock_state};
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn overlap_sq(a: &CVector, b: &CVector) -> f64 {
        a.dotc(b).norm_sqr()
    }

    #[test]
    fn identical_inputs_pass_through() {
        let psi = coherent_state(Complex64::new(0.4, -0.2), 12).unwrap();
        let chi = fock_state(0, 12).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let out = abstract_adder(&psi, &psi, c(0.8), c(0.3), &chi, sign).unwrap();
            assert!(1.0 - overlap_sq(&out.state, &psi) < 1e-14);
        }
    }

    #[test]
    fn hand_computed_superposition() {
        let zero = fock_state(0, 2).unwrap();
        let one = fock_state(1, 2).unwrap();
        let chi = (&zero + &one) / c(2f64.sqrt());
        let t = std::f64::consts::FRAC_PI_4;
        let out = abstract_adder(&zero, &one, c(t.cos()), c(t.sin()), &chi, Sign::Plus).unwrap();
        let want = (&zero + &one) / c(2f64.sqrt());
        assert!(1.0 - overlap_sq(&out.state, &want) < 1e-15);
        // γ = η = 1/2, orthogonal inputs: N² = ½ (¼ + ¼)
        assert!((out.norm_sq - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exact_cancellation_is_an_error() {
        let psi = fock_state(1, 3).unwrap();
        let chi = fock_state(1, 3).unwrap();
        let r = abstract_adder(&psi, &psi, c(0.5), c(0.5), &chi, Sign::Minus);
        assert!(matches!(r, Err(Error::DestructiveInterference(_))));
    }

    #[test]
    fn exact_target_matches_nominal_form_on_even_photon_numbers() {
        let layout = SpaceLayout::symmetric(5).unwrap();
        let even = |k: usize| {
            let mut v = CVector::zeros(5);
            v[0] = c(0.6);
            v[k] = Complex64::new(0.0, 0.8);
            v
        };
        let (psi, phi) = (even(2), even(4));
        let scheme = Scheme::new(Variant::EAuxGControl, 1, 2);
        let t = 0.7f64;
        let exact = exact_target(&scheme, Rational64::from(6), t, &psi, &phi, layout).unwrap();
        let g = qutrit(Level::G);
        let f = qutrit(Level::F);
        let nominal = QuantumState::product(layout, &g, &phi, &psi)
            .unwrap()
            .as_pure()
            .unwrap()
            * c(t.sin())
            + QuantumState::product(layout, &f, &psi, &phi).unwrap().as_pure().unwrap() * c(t.cos());
        let ov = exact.as_pure().unwrap().dotc(&nominal).norm_sqr();
        assert!(1.0 - ov < 1e-14);
    }

    fn qutrit(level: Level) -> CVector {
        crate::tensor::qutrit_state(level)
    }

    proptest! {
        #[test]
        fn outputs_are_normalized(
            re in proptest::collection::vec(-1.0f64..1.0, 12),
            theta in 0.0f64..std::f64::consts::TAU,
            minus in any::<bool>(),
        ) {
            let v = |o: usize| {
                let x = CVector::from_fn(3, |i, _| Complex64::new(re[o + 2 * i], re[o + 2 * i + 1]));
                let n = x.norm();
                x / c(n)
            };
            let (psi, phi) = (v(0), v(6));
            let chi = (&psi + &phi) / c(2.0);
            let sign = if minus { Sign::Minus } else { Sign::Plus };
            if let Ok(out) = abstract_adder(&psi, &phi, c(theta.sin()), c(theta.cos()), &chi, sign) {
                prop_assert!((out.state.norm() - 1.0).abs() < 1e-12);
                let gamma = c(theta.sin()) * chi.dotc(&phi);
                let eta = c(theta.cos()) * chi.dotc(&psi);
                let cross = (gamma * eta.conj() * phi.dotc(&psi)).re;
                let n2 = 0.5 * (gamma.norm_sqr() + eta.norm_sqr() + 2.0 * sign.value() * cross);
                prop_assert!((out.norm_sq - n2).abs() < 1e-12);
            }
        }
    }
}
