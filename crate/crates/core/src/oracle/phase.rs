use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{detuning_ratio, rate_over_abs_chi, timing_identities, Scheme};
use crate::tensor::Level;

/// The phase `e^{iqπ}` with `q` exact and reduced to `[0, 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExactPhase(Rational64);

impl ExactPhase {
    pub fn new(over_pi: Rational64) -> Self {
        let two = Rational64::from(2);
        let mut q = over_pi % two;
        if q < Rational64::zero() {
            q += two;
        }
        ExactPhase(q)
    }

    pub fn zero() -> Self {
        ExactPhase(Rational64::zero())
    }

    pub fn over_pi(&self) -> Rational64 {
        self.0
    }

    pub fn add(&self, other: ExactPhase) -> Self {
        ExactPhase::new(self.0 + other.0)
    }

    pub fn sub(&self, other: ExactPhase) -> Self {
        ExactPhase::new(self.0 - other.0)
    }

    /// `+1` or `-1` when the phase is real.
    pub fn sign(&self) -> Option<i8> {
        if self.0.is_zero() {
            Some(1)
        } else if self.0 == Rational64::from(1) {
            Some(-1)
        } else {
            None
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.0.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI)
    }
}

impl fmt::Display for ExactPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}π", self.0)
    }
}

/// How one qutrit branch maps the Fock state `|n⟩_A|m⟩_B` at the protocol time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchMap {
    pub level: Level,
    /// `|n, m⟩ -> e^{iφ} |m, n⟩` when set, `e^{iφ} |n, m⟩` otherwise.
    pub swapped: bool,
    pub phase: ExactPhase,
}

/// Slope and offset of the block on `level`, in units of `|χ|`.
fn block(level: Level, r: Rational64) -> (Rational64, Rational64) {
    let two = Rational64::from(2);
    match level {
        Level::G => (-rate_over_abs_chi(Level::G, r), Rational64::zero()),
        Level::E => (rate_over_abs_chi(Level::E, r), two * rate_over_abs_chi(Level::G, r)),
        Level::F => (rate_over_abs_chi(Level::F, r), two * rate_over_abs_chi(Level::F, r)),
    }
}

/// Branch maps of the ground and partner levels at the closed-form detuning.
pub fn conditional_phase(scheme: &Scheme, n: u64, m: u64) -> Result<[BranchMap; 2]> {
    conditional_phase_at(scheme, detuning_ratio(scheme)?, n, m)
}

/// Branch maps at `Δ/α = r`, with the time fixed by the swap condition.
///
/// Under `s (N + K) + o` for time `t`, `|n,m⟩` picks up `-s t (n+m) - o t`
/// and the beam splitter rotates by `θ = -s t`; `θ ≡ π/2` swaps with `i^{n+m}`,
/// `θ ≡ 3π/2` with `(-i)^{n+m}`, `θ ≡ π` flips the sign of every photon.
pub fn conditional_phase_at(scheme: &Scheme, r: Rational64, n: u64, m: u64) -> Result<[BranchMap; 2]> {
    let time = timing_identities(scheme, r)?.time_chi_over_pi;
    let photons = Rational64::from((n + m) as i64);
    let half = Rational64::new(1, 2);
    let map = |level: Level| -> Result<BranchMap> {
        let (slope, offset) = block(level, r);
        let stark = -slope * time * photons - offset * time;
        let angle = ExactPhase::new(-slope * time).over_pi();
        let (swapped, mixing) = if angle.is_zero() {
            (false, Rational64::zero())
        } else if angle == Rational64::from(1) {
            (false, photons)
        } else if angle == half {
            (true, photons * half)
        } else if angle == Rational64::new(3, 2) {
            (true, photons * Rational64::new(3, 2))
        } else {
            return Err(Error::ScheduleInconsistency(format!(
                "{} at Δ/α = {r}: {level} branch mixes by {angle}π, neither a swap nor the identity",
                scheme.variant
            )));
        };
        Ok(BranchMap {
            level,
            swapped,
            phase: ExactPhase::new(stark + mixing),
        })
    };
    Ok([map(Level::G)?, map(scheme.variant.partner())?])
}

/// Phase of the partner branch relative to the ground branch.
pub fn relative_phase(maps: &[BranchMap; 2]) -> ExactPhase {
    maps[1].phase.sub(maps[0].phase)
}

/// `true` when `n + m` is even; the parity that separates the exact maps from
/// the nominal formula targets.
pub fn even_photon_number(n: u64, m: u64) -> bool {
    (n + m).is_even()
}
