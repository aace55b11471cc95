use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{CVector, DEFAULT_TAIL_TOLERANCE};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const UNITARITY_TOL: f64 = 1e-12;

/// Which sign the sines carry in the mixing matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignConvention {
    PlusI,
    MinusI,
}

/// Linear action on creation operators: `(a†, b†) -> M (a†, b†)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMixMatrix {
    pub m: [[Complex64; 2]; 2],
}

impl ModeMixMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        ModeMixMatrix {
            m: [[one, ZERO], [ZERO, one]],
        }
    }

    /// `self` applied after `first`.
    pub fn then(&self, first: &ModeMixMatrix) -> ModeMixMatrix {
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = first.m[i][0] * self.m[0][j] + first.m[i][1] * self.m[1][j];
            }
        }
        ModeMixMatrix { m: out }
    }

    /// Largest entry of `M M† - 1`.
    pub fn unitarity_deficit(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = self.m[i][0] * self.m[j][0].conj() + self.m[i][1] * self.m[j][1].conj();
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deficit() < UNITARITY_TOL
    }
}

/// `[[cos rt, ±i sin rt], [±i sin rt, cos rt]]`.
pub fn beam_splitter_mix(rate: f64, t: f64, sign: SignConvention) -> ModeMixMatrix {
    let (s, c) = (rate * t).sin_cos();
    let off = match sign {
        SignConvention::PlusI => Complex64::new(0.0, s),
        SignConvention::MinusI => Complex64::new(0.0, -s),
    };
    let c = Complex64::new(c, 0.0);
    ModeMixMatrix { m: [[c, off], [off, c]] }
}

/// Coherent amplitudes after mixing: `(α', β')ᵀ = Mᵀ (α, β)ᵀ`.
pub fn coherent_bs_evolve(
    alpha: Complex64,
    beta: Complex64,
    mix: &ModeMixMatrix,
) -> Result<(Complex64, Complex64)> {
    if !mix.is_unitary() {
        return Err(Error::InvalidParameter(format!(
            "mode-mixing matrix is not unitary (deficit {:e})",
            mix.unitarity_deficit()
        )));
    }
    let m = &mix.m;
    Ok((
        m[0][0] * alpha + m[1][0] * beta,
        m[0][1] * alpha + m[1][1] * beta,
    ))
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

/// Two-mode state (A-major, `dim_a * dim_b`) after substituting the mixed
/// creation operators into its Fock expansion.
///
/// Fails when more than the default tail tolerance leaves the truncated box.
pub fn mix_two_mode(state: &CVector, mix: &ModeMixMatrix, dim_a: usize, dim_b: usize) -> Result<CVector> {
    if state.len() != dim_a * dim_b {
        return Err(Error::DimensionMismatch {
            expected: dim_a * dim_b,
            found: state.len(),
        });
    }
    let fact: Vec<f64> = (0..dim_a + dim_b)
        .scan(1.0, |acc, k| {
            if k > 0 {
                *acc *= k as f64;
            }
            Some(*acc)
        })
        .collect();
    let m = &mix.m;
    let mut out = CVector::zeros(dim_a * dim_b);
    let mut lost = 0.0;
    for n in 0..dim_a {
        for mm in 0..dim_b {
            let amp = state[n * dim_b + mm];
            if amp == ZERO {
                continue;
            }
            let pref = amp / (fact[n] * fact[mm]).sqrt();
            let bn = binomial_row(n);
            let bm = binomial_row(mm);
            // (M00 a† + M01 b†)^n (M10 a† + M11 b†)^m |0,0>
            for (j, cj) in bn.iter().enumerate() {
                let wj = m[0][0].powu(j as u32) * m[0][1].powu((n - j) as u32) * *cj;
                for (l, cl) in bm.iter().enumerate() {
                    let w = wj * m[1][0].powu(l as u32) * m[1][1].powu((mm - l) as u32) * *cl;
                    let pa = j + l;
                    let pb = (n - j) + (mm - l);
                    let v = pref * w * (fact[pa] * fact[pb]).sqrt();
                    if pa < dim_a && pb < dim_b {
                        out[pa * dim_b + pb] += v;
                    } else {
                        lost += v.norm_sqr();
                    }
                }
            }
        }
    }
    if lost > DEFAULT_TAIL_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "mode mixing leaves the {dim_a}x{dim_b} box (lost weight {lost:e})"
        )));
    }
    Ok(out)
}
