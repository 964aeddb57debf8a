//! The evaluated colored Burau representation and E-multiplication.
//!
//! `(m, σ) ⋆ β` multiplies `m` on the right by the colored Burau matrices of
//! the letters of `β`, one letter at a time. Before each letter the formal
//! variables are permuted by the running permutation and then evaluated at
//! the t-values; afterwards the running permutation absorbs the letter's
//! transposition. With the right-action convention of [`crate::perm`], the
//! variable `t_j` is evaluated at `τ_{σ⁻¹(j)}`: the t-value that started on
//! the strand now sitting at position `j`.
//!
//! Each colored Burau matrix differs from the identity in one row, so a
//! letter touches three columns of the running matrix and costs `O(N)`.

use thiserror::Error;

use crate::braid::{BraidError, BraidWord};
use crate::ffield::{FieldError, Gf, Matrix};
use crate::perm::Permutation;
use crate::rng::LabRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmultError {
    #[error("t-value {index} is zero")]
    ZeroTValue { index: usize },
    #[error("generator index {i} out of range for B_{n}")]
    GeneratorOutOfRange { i: usize, n: usize },
    #[error("strand counts disagree: {0} vs {1}")]
    StrandMismatch(usize, usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Braid(#[from] BraidError),
}

/// Nonzero field elements `τ_1..τ_N` substituted for the variables `t_1..t_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TValues {
    field: Gf,
    values: Vec<u32>,
    inverses: Vec<u32>,
}

impl TValues {
    pub fn new(field: &Gf, values: Vec<u32>) -> Result<Self, EmultError> {
        if let Some(&v) = values.iter().find(|&&v| !field.contains(v)) {
            return Err(FieldError::ElementOutOfRange { value: v as u64, q: field.order() }.into());
        }
        if let Some(index) = values.iter().position(|&v| v == 0) {
            return Err(EmultError::ZeroTValue { index: index + 1 });
        }
        let inverses = values.iter().map(|&v| field.inv(v)).collect();
        Ok(TValues { field: field.clone(), values, inverses })
    }

    pub fn random(field: &Gf, n: usize, rng: &mut LabRng) -> Self {
        let values = (0..n).map(|_| field.random_nonzero(rng)).collect();
        Self::new(field, values).expect("nonzero by construction")
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }
}

/// An element of `GL_N(F_q) × S_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EMultPair {
    pub matrix: Matrix,
    pub perm: Permutation,
}

impl EMultPair {
    pub fn new(matrix: Matrix, perm: Permutation) -> Result<Self, EmultError> {
        if !matrix.is_square() || matrix.rows() != perm.n() {
            return Err(EmultError::StrandMismatch(matrix.rows(), perm.n()));
        }
        Ok(EMultPair { matrix, perm })
    }

    pub fn identity(field: &Gf, n: usize) -> Self {
        EMultPair { matrix: Matrix::identity(field, n), perm: Permutation::identity(n) }
    }

    pub fn n(&self) -> usize {
        self.perm.n()
    }
}

/// Which t-value a permuted variable is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Twist {
    /// `t_j ↦ τ_{σ⁻¹(j)}`, the convention that makes the action well defined.
    InverseImage,
    /// `t_j ↦ τ_{σ(j)}`; kept only as a negative control.
    #[cfg_attr(not(test), allow(dead_code))]
    Image,
}

/// Running state of an E-multiplication fold.
///
/// `origin[j]` is the strand label currently at position `j` (that is,
/// `σ⁻¹(j)`), which is exactly the t-value index the variable `t_{j+1}` takes.
pub(crate) struct Fold<'a> {
    t: &'a TValues,
    matrix: Matrix,
    origin: Vec<u16>,
    twist: Twist,
}

impl<'a> Fold<'a> {
    pub(crate) fn new(start: &EMultPair, t: &'a TValues, twist: Twist) -> Self {
        let origin = start.perm.inverse().images_one_based().iter().map(|&x| (x - 1) as u16).collect();
        Fold { t, matrix: start.matrix.clone(), origin, twist }
    }

    /// t-value index for the variable at 0-based position `j`.
    #[inline]
    fn var(&self, j: usize) -> usize {
        match self.twist {
            Twist::InverseImage => self.origin[j] as usize,
            Twist::Image => {
                // σ(j) = position of label j in the origin table
                self.origin.iter().position(|&x| x as usize == j).unwrap()
            }
        }
    }

    /// Applies one letter; `letter` must already be validated.
    #[inline]
    pub(crate) fn push(&mut self, letter: i32) {
        let t = self.t;
        let f = &t.field;
        let i0 = letter.unsigned_abs() as usize - 1;
        let n = self.matrix.cols();
        let var = if letter > 0 { self.var(i0) } else { self.var(i0 + 1) };
        let data = self.matrix.data_mut();
        if letter > 0 {
            let c = t.values[var];
            let neg_c = f.neg(c);
            for row in data.chunks_exact_mut(n) {
                let x = row[i0];
                if x == 0 {
                    continue;
                }
                if i0 > 0 {
                    row[i0 - 1] = f.add(row[i0 - 1], f.mul(c, x));
                }
                row[i0] = f.mul(neg_c, x);
                row[i0 + 1] = f.add(row[i0 + 1], x);
            }
        } else {
            let d_inv = t.inverses[var];
            let neg_d_inv = f.neg(d_inv);
            for row in data.chunks_exact_mut(n) {
                let x = row[i0];
                if x == 0 {
                    continue;
                }
                if i0 > 0 {
                    row[i0 - 1] = f.add(row[i0 - 1], x);
                }
                row[i0] = f.mul(neg_d_inv, x);
                row[i0 + 1] = f.add(row[i0 + 1], f.mul(d_inv, x));
            }
        }
        self.origin.swap(i0, i0 + 1);
    }

    pub(crate) fn extend<I: IntoIterator<Item = i32>>(&mut self, letters: I) {
        for l in letters {
            self.push(l);
        }
    }

    pub(crate) fn finish(self) -> EMultPair {
        let images: Vec<usize> = self.origin.iter().map(|&x| x as usize + 1).collect();
        let perm = Permutation::from_images(&images).expect("origin table is a bijection").inverse();
        EMultPair { matrix: self.matrix, perm }
    }
}

fn check_compatible(start: &EMultPair, n: usize, t: &TValues) -> Result<(), EmultError> {
    if start.n() != n {
        return Err(EmultError::StrandMismatch(start.n(), n));
    }
    if t.n() != n {
        return Err(EmultError::StrandMismatch(t.n(), n));
    }
    if start.matrix.field() != &t.field {
        return Err(FieldError::FieldMismatch.into());
    }
    Ok(())
}

/// `(start.matrix, start.perm) ⋆ (CB(w), σ_w)`.
pub fn emult(start: &EMultPair, w: &BraidWord, t: &TValues) -> Result<EMultPair, EmultError> {
    check_compatible(start, w.n(), t)?;
    let mut fold = Fold::new(start, t, Twist::InverseImage);
    fold.extend(w.letters().iter().copied());
    Ok(fold.finish())
}

/// `Π(^σ w)`: the matrix of `w` with its variables twisted by `sigma`.
pub fn twisted_image(w: &BraidWord, sigma: &Permutation, t: &TValues) -> Result<Matrix, EmultError> {
    let start = EMultPair { matrix: Matrix::identity(&t.field, w.n()), perm: sigma.clone() };
    Ok(emult(&start, w, t)?.matrix)
}

/// The explicit one-letter matrix `Π(^σ b_i^{sign})`.
///
/// Row `i` of the positive matrix is `(…, t_i, −t_i, 1, …)` with `t_i` in
/// column `i−1` (absent for `i = 1`); the negative matrix has row
/// `(…, 1, −t_{i+1}⁻¹, t_{i+1}⁻¹, …)`. Variables are evaluated through `σ`.
pub fn cb_step_matrix(i: usize, sign: i8, t: &TValues, sigma: &Permutation) -> Result<Matrix, EmultError> {
    let n = t.n();
    if i == 0 || i >= n {
        return Err(EmultError::GeneratorOutOfRange { i, n });
    }
    if sigma.n() != n {
        return Err(EmultError::StrandMismatch(sigma.n(), n));
    }
    let f = &t.field;
    let inv = sigma.inverse();
    // τ for the variable t_j (1-based j)
    let tau = |j: usize| t.values[inv.apply(j) - 1];
    let mut m = Matrix::identity(f, n);
    let r = i - 1;
    if sign >= 0 {
        let c = tau(i);
        if i > 1 {
            m.set(r, r - 1, c);
        }
        m.set(r, r, f.neg(c));
        m.set(r, r + 1, 1);
    } else {
        let d_inv = f.inv(tau(i + 1));
        if i > 1 {
            m.set(r, r - 1, 1);
        }
        m.set(r, r, f.neg(d_inv));
        m.set(r, r + 1, d_inv);
    }
    Ok(m)
}

fn relations_hold(t: &TValues, start: &EMultPair, i: usize, twist: Twist) -> bool {
    let n = t.n();
    let run = |letters: &[i32]| {
        let mut fold = Fold::new(start, t, twist);
        fold.extend(letters.iter().copied());
        fold.finish()
    };
    let i = i as i32;
    let mut ok = true;
    if (i as usize) + 1 < n {
        ok &= run(&[i, i + 1, i]) == run(&[i + 1, i, i + 1]);
        ok &= run(&[-i, -(i + 1), -i]) == run(&[-(i + 1), -i, -(i + 1)]);
    }
    for j in (i + 2)..(n as i32) {
        ok &= run(&[i, j]) == run(&[j, i]);
        ok &= run(&[i, -j]) == run(&[-j, i]);
    }
    ok
}

/// Checks `b_i b_{i+1} b_i = b_{i+1} b_i b_{i+1}` and `b_i b_j = b_j b_i` for
/// every `j >= i+2`, evaluated from `(I, id)`.
pub fn braid_relation_check(t: &TValues, i: usize) -> Result<bool, EmultError> {
    let n = t.n();
    if i == 0 || i + 1 >= n {
        return Err(EmultError::GeneratorOutOfRange { i, n });
    }
    Ok(relations_hold(t, &EMultPair::identity(&t.field, n), i, Twist::InverseImage))
}

/// As [`braid_relation_check`] but from an arbitrary starting pair.
pub fn braid_relation_check_from(t: &TValues, start: &EMultPair, i: usize) -> Result<bool, EmultError> {
    let n = t.n();
    if i == 0 || i + 1 >= n {
        return Err(EmultError::GeneratorOutOfRange { i, n });
    }
    check_compatible(start, n, t)?;
    Ok(relations_hold(t, start, i, Twist::InverseImage))
}
