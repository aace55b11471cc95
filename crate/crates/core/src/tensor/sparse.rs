use std::collections::BTreeSet;

use num_complex::Complex64;

use super::operator::CMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square complex matrix in compressed sparse row form.
///
/// The dense buffers accepted by the kernels are row-major `n * n` slices, so
/// entry `(i, j)` lives at `i * n + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn from_dense(m: &CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "sparse matrices are square");
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Zero-valued matrix whose pattern is the union of the inputs' patterns.
    pub fn union_pattern(mats: &[&SparseMatrix]) -> Self {
        assert!(!mats.is_empty());
        let dim = mats[0].dim;
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        for i in 0..dim {
            let mut row = BTreeSet::new();
            for m in mats {
                assert_eq!(m.dim, dim);
                row.extend(m.row_cols(i).iter().copied());
            }
            cols.extend(row);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        SparseMatrix {
            dim,
            row_ptr,
            cols,
            vals: vec![ZERO; nnz],
        }
    }

    /// Values of `self` laid out on `pattern`, which must contain its support.
    pub fn values_on(&self, pattern: &SparseMatrix) -> Vec<Complex64> {
        assert_eq!(self.dim, pattern.dim);
        let mut out = vec![ZERO; pattern.nnz()];
        for i in 0..self.dim {
            let pcols = pattern.row_cols(i);
            let base = pattern.row_ptr[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                let pos = pcols
                    .binary_search(&j)
                    .expect("pattern must cover the matrix support");
                out[base + pos] = self.vals[k];
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.vals
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.vals
    }

    fn row_cols(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_dense(&self.to_dense().adjoint())
    }

    /// `y += A x` for vectors.
    pub fn mul_vec_add(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi += acc;
        }
    }

    /// `out += scale * A * rho` with `rho`, `out` row-major.
    pub fn mul_dense_add(&self, rho: &[Complex64], out: &mut [Complex64], scale: Complex64) {
        let n = self.dim;
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.vals[k] * scale;
                let j = self.cols[k];
                let src = &rho[j * n..(j + 1) * n];
                for (o, s) in out_row.iter_mut().zip(src) {
                    *o += v * s;
                }
            }
        }
    }

    /// `out += scale * rho * A` with `rho`, `out` row-major.
    pub fn right_mul_dense_add(&self, rho: &[Complex64], out: &mut [Complex64], scale: Complex64) {
        let n = self.dim;
        for i in 0..n {
            let src = &rho[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, r) in src.iter().enumerate() {
                if *r == ZERO {
                    continue;
                }
                let w = r * scale;
                for idx in self.row_ptr[k]..self.row_ptr[k + 1] {
                    out_row[self.cols[idx]] += w * self.vals[idx];
                }
            }
        }
    }

    /// `out += A * rho * A^dagger`, using `scratch` (n * n) for `A * rho`.
    pub fn sandwich_add(&self, rho: &[Complex64], scratch: &mut [Complex64], out: &mut [Complex64]) {
        if let Some(m) = self.monomial() {
            m.sandwich_add(rho, out);
            return;
        }
        scratch.iter_mut().for_each(|x| *x = ZERO);
        self.mul_dense_add(rho, scratch, Complex64::new(1.0, 0.0));
        self.adjoint().right_mul_dense_add(scratch, out, Complex64::new(1.0, 0.0));
    }

    /// Row form of a matrix with at most one nonzero per row and per column.
    pub fn monomial(&self) -> Option<Monomial> {
        let mut seen = vec![false; self.dim];
        let mut entries = Vec::new();
        for i in 0..self.dim {
            match self.row_ptr[i + 1] - self.row_ptr[i] {
                0 => {}
                1 => {
                    let k = self.row_ptr[i];
                    let j = self.cols[k];
                    if std::mem::replace(&mut seen[j], true) {
                        return None;
                    }
                    entries.push((i, j, self.vals[k]));
                }
                _ => return None,
            }
        }
        Some(Monomial::from_entries(self.dim, &entries))
    }
}

/// Matrix with at most one nonzero per row and per column, stored as runs
/// `A[i0 + t, p0 + t] = vals[t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    dim: usize,
    runs: Vec<(usize, usize, Vec<Complex64>)>,
}

impl Monomial {
    fn from_entries(dim: usize, entries: &[(usize, usize, Complex64)]) -> Self {
        let mut runs: Vec<(usize, usize, Vec<Complex64>)> = Vec::new();
        for &(i, p, v) in entries {
            match runs.last_mut() {
                Some((i0, p0, vals)) if *i0 + vals.len() == i && *p0 + vals.len() == p => vals.push(v),
                _ => runs.push((i, p, vec![v])),
            }
        }
        Monomial { dim, runs }
    }

    /// `out += A * rho * A^dagger`, a pure gather.
    pub fn sandwich_add(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        let conj: Vec<Vec<Complex64>> = self
            .runs
            .iter()
            .map(|(_, _, v)| v.iter().map(|b| b.conj()).collect())
            .collect();
        for (i0, p0, vals) in &self.runs {
            for (t, a) in vals.iter().enumerate() {
                let src = &rho[(p0 + t) * n..(p0 + t + 1) * n];
                let dst = &mut out[(i0 + t) * n..(i0 + t + 1) * n];
                for ((j0, q0, _), cb) in self.runs.iter().zip(&conj) {
                    let d = &mut dst[*j0..*j0 + cb.len()];
                    let s = &src[*q0..*q0 + cb.len()];
                    for ((o, x), b) in d.iter_mut().zip(s).zip(cb) {
                        *o += a * x * b;
                    }
                }
            }
        }
    }
}

/// `out = x + x^dagger` for row-major square `x`, in cache blocks.
pub fn hermitian_fold(x: &[Complex64], out: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (ib..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb.max(i)..(jb + B).min(n) {
                    let v = x[i * n + j] + x[j * n + i].conj();
                    out[i * n + j] = v;
                    out[j * n + i] = v.conj();
                }
            }
        }
    }
}

/// Row-major copy of a dense matrix.
pub fn to_row_major(m: &CMatrix) -> Vec<Complex64> {
    let (r, c) = m.shape();
    let mut v = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub fn from_row_major(dim: usize, data: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(dim, dim, data)
}
