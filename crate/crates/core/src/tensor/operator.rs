use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::{Level, Slot, SpaceLayout};
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Truncated bosonic annihilation operator on `dim` Fock levels.
pub fn annihilation(dim: usize) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Number operator `diag(0, 1, ..., dim - 1)`.
pub fn number(dim: usize) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Qutrit matrix `|to><from|`.
pub fn qutrit_transition(from: Level, to: Level) -> CMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m[(to.index(), from.index())] = Complex64::new(1.0, 0.0);
    m
}

/// Qutrit projector `|level><level|`.
pub fn projector(level: Level) -> CMatrix {
    qutrit_transition(level, level)
}

/// Operator acting on the full `qutrit ⊗ A ⊗ B` space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: SpaceLayout,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(layout: SpaceLayout, matrix: CMatrix) -> Result<Self> {
        let dim = layout.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if matrix.nrows() != dim {
                    matrix.nrows()
                } else {
                    matrix.ncols()
                },
            });
        }
        Ok(Operator { layout, matrix })
    }

    pub fn zeros(layout: SpaceLayout) -> Self {
        let dim = layout.dim();
        Operator {
            layout,
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let dim = layout.dim();
        Operator {
            layout,
            matrix: CMatrix::identity(dim, dim),
        }
    }

    /// Lifts a single-factor operator into the full space.
    pub fn embed(local: &CMatrix, slot: Slot, layout: SpaceLayout) -> Result<Self> {
        let d = layout.slot_dim(slot);
        if local.nrows() != d || local.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: local.nrows(),
            });
        }
        let iq = CMatrix::identity(3, 3);
        let ia = CMatrix::identity(layout.fock_a(), layout.fock_a());
        let ib = CMatrix::identity(layout.fock_b(), layout.fock_b());
        let matrix = match slot {
            Slot::Qutrit => local.kronecker(&ia).kronecker(&ib),
            Slot::CavityA => iq.kronecker(local).kronecker(&ib),
            Slot::CavityB => iq.kronecker(&ia).kronecker(local),
        };
        Ok(Operator { layout, matrix })
    }

    /// Product operator `q ⊗ a ⊗ b`.
    pub fn product(q: &CMatrix, a: &CMatrix, b: &CMatrix, layout: SpaceLayout) -> Result<Self> {
        for (m, slot) in [(q, Slot::Qutrit), (a, Slot::CavityA), (b, Slot::CavityB)] {
            let d = layout.slot_dim(slot);
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.nrows(),
                });
            }
        }
        Ok(Operator {
            layout,
            matrix: q.kronecker(a).kronecker(b),
        })
    }

    pub fn cavity_a(layout: SpaceLayout) -> Self {
        let a = annihilation(layout.fock_a()).expect("layout dims are nonzero");
        Self::embed(&a, Slot::CavityA, layout).expect("matching dims")
    }

    pub fn cavity_b(layout: SpaceLayout) -> Self {
        let b = annihilation(layout.fock_b()).expect("layout dims are nonzero");
        Self::embed(&b, Slot::CavityB, layout).expect("matching dims")
    }

    pub fn qutrit(from: Level, to: Level, layout: SpaceLayout) -> Self {
        Self::embed(&qutrit_transition(from, to), Slot::Qutrit, layout).expect("qutrit is 3x3")
    }

    pub fn layout(&self) -> SpaceLayout {
        self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            layout: self.layout,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Operator {
            layout: self.layout,
            matrix: &self.matrix * factor,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn try_add(&self, other: &Operator) -> Result<Self> {
        self.layout.ensure_same(&other.layout)?;
        Ok(Operator {
            layout: self.layout,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Self> {
        self.layout.ensure_same(&other.layout)?;
        Ok(Operator {
            layout: self.layout,
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        self.layout.ensure_same(&other.layout)?;
        Ok(Operator {
            layout: self.layout,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.layout.ensure_same(&other.layout)?;
        Ok(Operator {
            layout: self.layout,
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        })
    }

    pub fn add_assign_scaled(&mut self, other: &Operator, factor: Complex64) -> Result<()> {
        self.layout.ensure_same(&other.layout)?;
        self.matrix.zip_apply(&other.matrix, |x, y| *x += y * factor);
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entry of `|A - A^dagger|`.
    pub fn hermiticity_deficit(&self) -> f64 {
        hermiticity_deficit(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deficit() <= tol
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        SparseMatrix::from_dense(&self.matrix)
    }
}

pub(crate) fn hermiticity_deficit(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}
