use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::shifts::DispersiveShifts;
use crate::error::{Error, Result};
use crate::tensor::Level;

/// Protocol family: auxiliary (unused) qutrit level and the level that swaps the cavities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    EAuxGControl,
    EAuxFControl,
    FAuxGControl,
    FAuxEControl,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::EAuxGControl,
        Variant::EAuxFControl,
        Variant::FAuxGControl,
        Variant::FAuxEControl,
    ];

    /// The level that never gets populated.
    pub fn auxiliary(self) -> Level {
        match self {
            Variant::EAuxGControl | Variant::EAuxFControl => Level::E,
            Variant::FAuxGControl | Variant::FAuxEControl => Level::F,
        }
    }

    /// The ancilla is prepared in `sin θ |g> + cos θ |x>`; this returns `x`.
    pub fn partner(self) -> Level {
        match self.auxiliary() {
            Level::E => Level::F,
            _ => Level::E,
        }
    }

    /// Qutrit level on which the two cavities are exchanged.
    pub fn swap_level(self) -> Level {
        match self {
            Variant::EAuxGControl | Variant::FAuxGControl => Level::G,
            Variant::EAuxFControl => Level::F,
            Variant::FAuxEControl => Level::E,
        }
    }

    /// Qutrit level on which the cavities are left alone.
    pub fn idle_level(self) -> Level {
        if self.swap_level() == Level::G {
            self.partner()
        } else {
            Level::G
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Variant::EAuxGControl => "eg",
            Variant::EAuxFControl => "ef",
            Variant::FAuxGControl => "fg",
            Variant::FAuxEControl => "fe",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Variant::ALL
            .iter()
            .copied()
            .find(|v| v.short_name() == lower || v.to_string().to_ascii_lowercase() == lower)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// Sign choice in the `∓3` of the F-auxiliary / E-control detuning rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeBranch {
    /// `4k2 - 4k1 - 3`.
    Upper,
    /// `4k2 - 4k1 + 3`.
    #[default]
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scheme {
    pub variant: Variant,
    pub k1: u32,
    pub k2: u32,
    #[serde(default)]
    pub fe_branch: FeBranch,
}

impl Scheme {
    pub fn new(variant: Variant, k1: u32, k2: u32) -> Self {
        Scheme {
            variant,
            k1,
            k2,
            fe_branch: FeBranch::default(),
        }
    }

    pub fn with_fe_branch(mut self, branch: FeBranch) -> Self {
        self.fe_branch = branch;
        self
    }

    /// Swap phase target `|swap rate| t / π = 1/2 + 2 k1`.
    pub fn swap_phase_over_pi(&self) -> Rational64 {
        Rational64::new(1, 2) + Rational64::from(2 * self.k1 as i64)
    }

    /// Identity phase target `|idle rate| t / π = 2 + 2 k2`.
    pub fn idle_phase_over_pi(&self) -> Rational64 {
        Rational64::from(2 + 2 * self.k2 as i64)
    }

    /// Required `|idle rate| / |swap rate|`.
    pub fn required_rate_ratio(&self) -> Rational64 {
        self.idle_phase_over_pi() / self.swap_phase_over_pi()
    }

    fn invalid(&self) -> Error {
        Error::InvalidSchedule {
            scheme: self.variant.to_string(),
            k1: self.k1,
            k2: self.k2,
        }
    }
}

/// `Δ / α` from the closed-form detuning rule of each family.
pub fn detuning_ratio(scheme: &Scheme) -> Result<Rational64> {
    let k1 = scheme.k1 as i64;
    let k2 = scheme.k2 as i64;
    let (num, den) = match scheme.variant {
        Variant::EAuxGControl => (2 * (k2 + 1), 2 * k2 - 4 * k1 + 1),
        Variant::EAuxFControl => (4 * k1 + 1, 4 * k1 - 8 * k2 - 7),
        Variant::FAuxGControl => (4 * k1 + 4 * k2 + 5, 4 * k2 - 4 * k1 + 3),
        Variant::FAuxEControl => {
            let sign = match scheme.fe_branch {
                FeBranch::Upper => -3,
                FeBranch::Lower => 3,
            };
            (4 * k1 + 4 * k2 + 5, 4 * k2 - 4 * k1 + sign)
        }
    };
    if den == 0 {
        return Err(scheme.invalid());
    }
    let r = Rational64::new(num, den);
    if r.abs() <= Rational64::from(1) {
        return Err(Error::RegimeViolation {
            ratio: r.to_string(),
        });
    }
    Ok(r)
}

/// Shift of `level` divided by `|χ|`, signed, at `Δ/α = r` (requires `r ≠ 0, 1`).
///
/// `χ/|χ| = sign(r)`, `λ/χ = 2r/(r-1)`, `Λ/χ = -(r+1)/(r-1)`.
pub fn rate_over_abs_chi(level: Level, r: Rational64) -> Rational64 {
    let one = Rational64::from(1);
    let sign = if r.is_negative() { -one } else { one };
    match level {
        Level::G => sign,
        Level::F => sign * Rational64::from(2) * r / (r - one),
        Level::E => -sign * (r + one) / (r - one),
    }
}

/// Exact phases accumulated at the protocol time, in units of π.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimingIdentities {
    /// `|χ| t / π`.
    pub time_chi_over_pi: Rational64,
    pub swap_phase_over_pi: Rational64,
    pub idle_phase_over_pi: Rational64,
}

impl TimingIdentities {
    /// Both timing conditions hold, with zero tolerance.
    pub fn holds(&self, scheme: &Scheme) -> bool {
        self.swap_phase_over_pi == scheme.swap_phase_over_pi()
            && self.idle_phase_over_pi == scheme.idle_phase_over_pi()
    }
}

/// Time fixed by the swap condition at `Δ/α = r`, and the phases that result.
pub fn timing_identities(scheme: &Scheme, r: Rational64) -> Result<TimingIdentities> {
    if r.is_zero() || r == Rational64::from(1) {
        return Err(Error::Resonance {
            delta: r.to_f64().unwrap_or(f64::NAN),
            anharm: 1.0,
        });
    }
    let swap = rate_over_abs_chi(scheme.variant.swap_level(), r).abs();
    let idle = rate_over_abs_chi(scheme.variant.idle_level(), r).abs();
    let t = scheme.swap_phase_over_pi() / swap;
    Ok(TimingIdentities {
        time_chi_over_pi: t,
        swap_phase_over_pi: swap * t,
        idle_phase_over_pi: idle * t,
    })
}

/// Every `Δ/α` with `|Δ/α| > 1` for which both timing conditions hold.
///
/// The idle/swap rate ratio is a Möbius function of `r`; setting its absolute
/// value to the required ratio gives two linear equations.
pub fn consistent_detuning_ratios(scheme: &Scheme) -> Vec<Rational64> {
    let one = Rational64::from(1);
    let target = scheme.required_rate_ratio();
    let mut out = Vec::new();
    // Write idle/swap = (p r + q) / (u r + w) on each sign sector of r.
    for sector_sign in [one, -one] {
        for branch in [target, -target] {
            let (p, q, u, w) = mobius(scheme.variant, sector_sign);
            // (p r + q) = branch (u r + w)
            let den = p - branch * u;
            if den.is_zero() {
                continue;
            }
            let r = (branch * w - q) / den;
            let in_sector = if sector_sign.is_positive() {
                r.is_positive()
            } else {
                r.is_negative()
            };
            if in_sector
                && r.abs() > one
                && timing_identities(scheme, r).is_ok_and(|t| t.holds(scheme))
                && !out.contains(&r)
            {
                out.push(r);
            }
        }
    }
    out.sort();
    out
}

/// Coefficients of the signed rates on a sign sector, as `(x r + y) / (r - 1)`.
fn level_mobius(level: Level, sign: Rational64) -> (Rational64, Rational64) {
    let one = Rational64::from(1);
    let zero = Rational64::zero();
    match level {
        // sign = sign (r - 1)/(r - 1)
        Level::G => (sign, -sign),
        Level::F => (sign * Rational64::from(2), zero),
        Level::E => (-sign, -sign * one),
    }
}

fn mobius(variant: Variant, sign: Rational64) -> (Rational64, Rational64, Rational64, Rational64) {
    let (p, q) = level_mobius(variant.idle_level(), sign);
    let (u, w) = level_mobius(variant.swap_level(), sign);
    (p, q, u, w)
}

/// Which timing conditions `protocol_time` enforces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimingPolicy {
    /// Both conditions must hold (relative 1e-12), otherwise an error.
    #[default]
    Strict,
    /// Time from the swap condition alone; the identity condition is not checked.
    SwapCondition,
}

/// Relative tolerance of the identity-condition check.
pub const TIMING_RTOL: f64 = 1e-12;

/// Positive protocol time for `scheme` under `shifts`.
pub fn protocol_time(scheme: &Scheme, shifts: &DispersiveShifts, policy: TimingPolicy) -> Result<f64> {
    let rate = |level: Level| match level {
        Level::G => shifts.chi.abs(),
        Level::E => shifts.big_lam.abs(),
        Level::F => shifts.lam.abs(),
    };
    let swap = rate(scheme.variant.swap_level());
    if !(swap > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "swap rate of {} vanishes",
            scheme.variant
        )));
    }
    let t = (0.5 + 2.0 * scheme.k1 as f64) * PI / swap;
    if policy == TimingPolicy::Strict {
        let idle = rate(scheme.variant.idle_level()) * t;
        let want = (2.0 + 2.0 * scheme.k2 as f64) * PI;
        if ((idle - want) / want).abs() > TIMING_RTOL {
            return Err(Error::ScheduleInconsistency(format!(
                "{} with k1 = {}, k2 = {}: identity phase {:.12} pi, expected {} pi",
                scheme.variant,
                scheme.k1,
                scheme.k2,
                idle / PI,
                2 + 2 * scheme.k2
            )));
        }
    }
    Ok(t)
}
