use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transmon level, in basis order `g, e, f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    G,
    E,
    F,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::G, Level::E, Level::F];

    pub fn index(self) -> usize {
        match self {
            Level::G => 0,
            Level::E => 1,
            Level::F => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Level> {
        Level::ALL.get(index).copied()
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Level::G => "g",
            Level::E => "e",
            Level::F => "f",
        };
        f.write_str(s)
    }
}

/// One tensor factor of the full space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slot {
    Qutrit,
    CavityA,
    CavityB,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Qutrit, Slot::CavityA, Slot::CavityB];

    fn position(self) -> usize {
        match self {
            Slot::Qutrit => 0,
            Slot::CavityA => 1,
            Slot::CavityB => 2,
        }
    }
}

/// Dimensions of `qutrit ⊗ cavity A ⊗ cavity B`.
///
/// The ordering is fixed and qutrit-major: the basis state `|q, n, m>` sits at
/// index `q * N_A * N_B + n * N_B + m` with `q` running over `g, e, f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLayout {
    fock_a: usize,
    fock_b: usize,
}

impl SpaceLayout {
    pub const QUTRIT_DIM: usize = 3;

    pub fn new(fock_a: usize, fock_b: usize) -> Result<Self> {
        if fock_a == 0 {
            return Err(Error::InvalidDimension(fock_a));
        }
        if fock_b == 0 {
            return Err(Error::InvalidDimension(fock_b));
        }
        Ok(SpaceLayout { fock_a, fock_b })
    }

    /// Same truncation on both cavities.
    pub fn symmetric(fock: usize) -> Result<Self> {
        Self::new(fock, fock)
    }

    pub fn fock_a(&self) -> usize {
        self.fock_a
    }

    pub fn fock_b(&self) -> usize {
        self.fock_b
    }

    pub fn dim(&self) -> usize {
        Self::QUTRIT_DIM * self.fock_a * self.fock_b
    }

    pub fn slot_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::Qutrit => Self::QUTRIT_DIM,
            Slot::CavityA => self.fock_a,
            Slot::CavityB => self.fock_b,
        }
    }

    pub(crate) fn slot_dims(&self) -> [usize; 3] {
        [Self::QUTRIT_DIM, self.fock_a, self.fock_b]
    }

    pub(crate) fn slot_position(slot: Slot) -> usize {
        slot.position()
    }

    /// Flat index of `|level, n, m>`.
    pub fn index(&self, level: Level, n: usize, m: usize) -> usize {
        debug_assert!(n < self.fock_a && m < self.fock_b);
        (level.index() * self.fock_a + n) * self.fock_b + m
    }

    /// Inverse of [`SpaceLayout::index`], returning `(q, n, m)`.
    pub fn decompose(&self, index: usize) -> (usize, usize, usize) {
        let m = index % self.fock_b;
        let rest = index / self.fock_b;
        (rest / self.fock_a, rest % self.fock_a, m)
    }

    pub fn ensure_same(&self, other: &SpaceLayout) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LayoutMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

impl fmt::Display for SpaceLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "3x{}x{}", self.fock_a, self.fock_b)
    }
}
