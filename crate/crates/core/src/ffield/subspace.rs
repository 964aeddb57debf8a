use super::{FieldError, Gf, Matrix};
use crate::rng::LabRng;

/// Reduces `rows` to reduced row-echelon form, dropping zero rows.
/// Returns the pivot column of each remaining row (strictly increasing).
pub(crate) fn rref_in_place(f: &Gf, rows: &mut Vec<Vec<u32>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        let Some(p) = (next..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(next, p);
        let s = f.inv(rows[next][col]);
        for v in rows[next].iter_mut() {
            *v = f.mul(*v, s);
        }
        let pivot_row = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == next || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            axpy_neg(f, row, factor, &pivot_row);
        }
        pivots.push(col);
        next += 1;
        if next == rows.len() {
            break;
        }
    }
    rows.truncate(next);
    pivots
}

/// `row -= factor * other`
#[inline]
fn axpy_neg(f: &Gf, row: &mut [u32], factor: u32, other: &[u32]) {
    let nf = f.neg(factor);
    for (x, &y) in row.iter_mut().zip(other) {
        if y != 0 {
            *x = f.add(*x, f.mul(nf, y));
        }
    }
}

/// A linear subspace of `F_q^d`, held as a reduced row-echelon basis.
///
/// Matrices enter as their row-major flattening, so the ambient dimension for
/// `N×N` matrices is `N²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    field: Gf,
    ambient_dim: usize,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: &Gf, ambient_dim: usize) -> Self {
        Subspace { field: field.clone(), ambient_dim, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn spanned_by<'a, I>(field: &Gf, ambient_dim: usize, vectors: I) -> Result<Self, FieldError>
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        let mut s = Self::zero(field, ambient_dim);
        for v in vectors {
            s.insert(v)?;
        }
        Ok(s)
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check_len(&self, v: &[u32]) -> Result<(), FieldError> {
        if v.len() != self.ambient_dim {
            return Err(FieldError::DimensionMismatch(format!(
                "vector of length {} in ambient dimension {}",
                v.len(),
                self.ambient_dim
            )));
        }
        Ok(())
    }

    /// Residue of `v` after eliminating every pivot column.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let mut r = v.to_vec();
        for (row, &pc) in self.basis.iter().zip(&self.pivots) {
            let c = r[pc];
            if c != 0 {
                axpy_neg(&self.field, &mut r, c, row);
            }
        }
        r
    }

    pub fn contains(&self, v: &[u32]) -> Result<bool, FieldError> {
        self.check_len(v)?;
        Ok(self.reduce(v).iter().all(|&x| x == 0))
    }

    /// `span_insert`: adds `v` to the span. Returns whether the dimension grew.
    pub fn insert(&mut self, v: &[u32]) -> Result<bool, FieldError> {
        self.check_len(v)?;
        let mut r = self.reduce(v);
        let Some(pc) = r.iter().position(|&x| x != 0) else {
            return Ok(false);
        };
        let f = &self.field;
        let s = f.inv(r[pc]);
        for x in r.iter_mut() {
            *x = f.mul(*x, s);
        }
        for row in self.basis.iter_mut() {
            let c = row[pc];
            if c != 0 {
                axpy_neg(f, row, c, &r);
            }
        }
        let at = self.pivots.partition_point(|&p| p < pc);
        self.pivots.insert(at, pc);
        self.basis.insert(at, r);
        Ok(true)
    }
}

/// Basis of the right null space `{x : A x = 0}` of the matrix with the given rows.
pub fn kernel(field: &Gf, rows: &[Vec<u32>], cols: usize) -> Vec<Vec<u32>> {
    let mut r = rows.to_vec();
    let pivots = rref_in_place(field, &mut r, cols);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![0u32; cols];
        x[free] = 1;
        for (row, &pc) in r.iter().zip(&pivots) {
            x[pc] = field.neg(row[free]);
        }
        out.push(x);
    }
    out
}

/// Coefficients `λ` with `Σ λ_i generators[i] = target`, if any exist.
/// When the generators are dependent, the free coefficients are set to zero.
pub fn solve_combination(field: &Gf, generators: &[Vec<u32>], target: &[u32]) -> Option<Vec<u32>> {
    let m = generators.len();
    let d = target.len();
    // one equation per ambient coordinate: [g_0[j] .. g_{m-1}[j] | t[j]]
    let mut rows: Vec<Vec<u32>> = (0..d)
        .map(|j| {
            let mut row: Vec<u32> = generators.iter().map(|g| g[j]).collect();
            row.push(target[j]);
            row
        })
        .filter(|row| row.iter().any(|&x| x != 0))
        .collect();
    let pivots = rref_in_place(field, &mut rows, m + 1);
    if pivots.last() == Some(&m) {
        return None;
    }
    let mut lambda = vec![0u32; m];
    for (row, &pc) in rows.iter().zip(&pivots) {
        lambda[pc] = row[m];
    }
    Some(lambda)
}

/// `subspace_intersect`: basis of `u ∩ w` from the kernel of the stacked system.
///
/// A vector `(x, y)` with `x·U + y·W = 0` yields `x·U ∈ u ∩ w`, so the left
/// kernel of the stacked bases maps onto the intersection.
pub fn subspace_intersect(u: &Subspace, w: &Subspace) -> Result<Subspace, FieldError> {
    if u.field != w.field {
        return Err(FieldError::FieldMismatch);
    }
    if u.ambient_dim != w.ambient_dim {
        return Err(FieldError::DimensionMismatch(format!(
            "intersecting subspaces of ambient dimension {} and {}",
            u.ambient_dim, w.ambient_dim
        )));
    }
    let f = &u.field;
    let d = u.ambient_dim;
    let stacked: Vec<&Vec<u32>> = u.basis.iter().chain(&w.basis).collect();
    let cols = stacked.len();
    let transposed: Vec<Vec<u32>> = (0..d).map(|j| stacked.iter().map(|v| v[j]).collect()).collect();
    let mut out = Subspace::zero(f, d);
    for x in kernel(f, &transposed, cols) {
        let mut v = vec![0u32; d];
        for (coef, row) in x[..u.dim()].iter().zip(&u.basis) {
            if *coef != 0 {
                for (acc, &e) in v.iter_mut().zip(row) {
                    *acc = f.add(*acc, f.mul(*coef, e));
                }
            }
        }
        out.insert(&v)?;
    }
    Ok(out)
}

/// Random combination of the basis of `s` that is an invertible square matrix.
pub fn random_invertible_in(s: &Subspace, rng: &mut LabRng, budget: usize) -> Result<Matrix, FieldError> {
    let f = &s.field;
    let n = (s.ambient_dim as f64).sqrt().round() as usize;
    if n * n != s.ambient_dim {
        return Err(FieldError::DimensionMismatch(format!(
            "ambient dimension {} is not a perfect square",
            s.ambient_dim
        )));
    }
    if s.dim() == 0 {
        return Err(FieldError::ZeroSubspace);
    }
    for _ in 0..budget {
        let mut v = vec![0u32; s.ambient_dim];
        for row in &s.basis {
            let c = f.random(rng);
            if c == 0 {
                continue;
            }
            for (acc, &e) in v.iter_mut().zip(row) {
                *acc = f.add(*acc, f.mul(c, e));
            }
        }
        let m = Matrix::from_flat(f, n, n, v)?;
        if m.is_invertible() {
            return Ok(m);
        }
    }
    Err(FieldError::BudgetExhausted(budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn gf2() -> Gf {
        Gf::for_order(2).unwrap()
    }

    fn e(i: usize, d: usize) -> Vec<u32> {
        let mut v = vec![0; d];
        v[i] = 1;
        v
    }

    /// Every vector in the span, by enumerating all GF(2) coefficient choices.
    fn enumerate_span_gf2(vectors: &[Vec<u32>], d: usize) -> BTreeSet<Vec<u32>> {
        let mut out = BTreeSet::new();
        for mask in 0u32..(1 << vectors.len()) {
            let mut v = vec![0u32; d];
            for (i, g) in vectors.iter().enumerate() {
                if (mask >> i) & 1 == 1 {
                    for (a, b) in v.iter_mut().zip(g) {
                        *a ^= b;
                    }
                }
            }
            out.insert(v);
        }
        out
    }

    #[test]
    fn inserting_zero_or_a_repeat_does_not_grow() {
        let f = Gf::for_order(5).unwrap();
        let mut s = Subspace::zero(&f, 4);
        assert!(!s.insert(&[0, 0, 0, 0]).unwrap());
        assert!(s.insert(&[1, 2, 3, 4]).unwrap());
        assert!(!s.insert(&[1, 2, 3, 4]).unwrap());
        assert!(!s.insert(&[2, 4, 1, 3]).unwrap());
        assert_eq!(s.dim(), 1);
        assert!(s.insert(&[1, 2]).is_err());
    }

    #[test]
    fn fills_the_ambient_space() {
        let f = gf2();
        let d = 9;
        let mut s = Subspace::zero(&f, d);
        let mut rng = LabRng::from_seed(5);
        let mut history = Vec::new();
        while s.dim() < d {
            let v: Vec<u32> = (0..d).map(|_| f.random(&mut rng)).collect();
            let before = s.dim();
            let grew = s.insert(&v).unwrap();
            assert_eq!(grew, s.dim() == before + 1);
            history.push(v);
            // rank oracle: full elimination of everything inserted so far
            let mut rows = history.clone();
            assert_eq!(rref_in_place(&f, &mut rows, d).len(), s.dim());
        }
        for i in 0..d {
            assert!(!s.insert(&e(i, d)).unwrap());
        }
        assert!(s.pivots().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn intersection_small_cases() {
        let f = gf2();
        let u = Subspace::spanned_by(&f, 4, [&e(0, 4)[..], &e(1, 4)[..]]).unwrap();
        let w = Subspace::spanned_by(&f, 4, [&e(1, 4)[..], &e(2, 4)[..]]).unwrap();
        let i = subspace_intersect(&u, &w).unwrap();
        assert_eq!(i.dim(), 1);
        assert_eq!(i.basis()[0], e(1, 4));
        assert_eq!(subspace_intersect(&u, &u).unwrap().dim(), 2);
        assert_eq!(subspace_intersect(&u, &Subspace::zero(&f, 4)).unwrap().dim(), 0);
        assert!(subspace_intersect(&u, &Subspace::zero(&f, 5)).is_err());
    }

    #[test]
    fn intersection_matches_enumeration_on_random_pairs() {
        let f = gf2();
        let mut rng = LabRng::from_seed(77);
        for _ in 0..300 {
            let d = rng.range_inclusive(1, 6);
            let gen = |rng: &mut LabRng| -> Vec<Vec<u32>> {
                let k = rng.range_inclusive(0, d);
                (0..k).map(|_| (0..d).map(|_| f.random(rng)).collect()).collect()
            };
            let (a, b) = (gen(&mut rng), gen(&mut rng));
            let u = Subspace::spanned_by(&f, d, a.iter().map(Vec::as_slice)).unwrap();
            let w = Subspace::spanned_by(&f, d, b.iter().map(Vec::as_slice)).unwrap();
            let got = subspace_intersect(&u, &w).unwrap();
            let want: BTreeSet<_> =
                enumerate_span_gf2(&a, d).intersection(&enumerate_span_gf2(&b, d)).cloned().collect();
            assert_eq!(enumerate_span_gf2(got.basis(), d), want);
        }
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let f = Gf::for_order(7).unwrap();
        let mut rng = LabRng::from_seed(8);
        for _ in 0..30 {
            let rows: Vec<Vec<u32>> = (0..3).map(|_| (0..5).map(|_| f.random(&mut rng)).collect()).collect();
            let ker = kernel(&f, &rows, 5);
            let mut r = rows.clone();
            let rank = rref_in_place(&f, &mut r, 5).len();
            assert_eq!(ker.len(), 5 - rank);
            for x in &ker {
                for row in &rows {
                    let dot = row.iter().zip(x).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
                    assert_eq!(dot, 0);
                }
            }
        }
    }

    #[test]
    fn solve_combination_recovers_coefficients() {
        let f = Gf::for_order(32).unwrap();
        let mut rng = LabRng::from_seed(12);
        let gens: Vec<Vec<u32>> = (0..4).map(|_| (0..9).map(|_| f.random(&mut rng)).collect()).collect();
        let lambda: Vec<u32> = (0..4).map(|_| f.random(&mut rng)).collect();
        let mut target = vec![0u32; 9];
        for (l, g) in lambda.iter().zip(&gens) {
            for (t, &x) in target.iter_mut().zip(g) {
                *t = f.add(*t, f.mul(*l, x));
            }
        }
        assert_eq!(solve_combination(&f, &gens, &target).unwrap(), lambda);
        let off: Vec<u32> = (0..9).map(|_| f.random(&mut rng)).collect();
        let s = Subspace::spanned_by(&f, 9, gens.iter().map(Vec::as_slice)).unwrap();
        assert_eq!(solve_combination(&f, &gens, &off).is_some(), s.contains(&off).unwrap());
    }

    #[test]
    fn invertible_sampling() {
        let f = Gf::for_order(5).unwrap();
        let mut rng = LabRng::from_seed(21);
        let id = Matrix::identity(&f, 3);
        let s = Subspace::spanned_by(&f, 9, [id.as_flat()]).unwrap();
        let m = random_invertible_in(&s, &mut rng, 64).unwrap();
        let c = m.get(0, 0);
        assert_ne!(c, 0);
        assert_eq!(m, Matrix::scalar(&f, 3, c));

        let nil = Matrix::from_rows(&f, &[vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]).unwrap();
        let s = Subspace::spanned_by(&f, 9, [nil.as_flat()]).unwrap();
        assert_eq!(random_invertible_in(&s, &mut rng, 64), Err(FieldError::BudgetExhausted(64)));
        assert_eq!(random_invertible_in(&Subspace::zero(&f, 9), &mut rng, 64), Err(FieldError::ZeroSubspace));
    }

    #[test]
    fn identity_plus_singular_has_invertible_members() {
        let f = Gf::for_order(5).unwrap();
        let sing = Matrix::from_rows(&f, &[vec![1, 2, 0], vec![2, 4, 0], vec![0, 0, 3]]).unwrap();
        let id = Matrix::identity(&f, 3);
        // exhaustive: of the 25 combinations a·I + b·M, some are invertible
        let invertible = (0..5)
            .flat_map(|a| (0..5).map(move |b| (a, b)))
            .filter(|&(a, b)| Matrix::scalar(&f, 3, a).add(&sing.scale(b)).unwrap().is_invertible())
            .count();
        assert!(invertible > 0);
        let s = Subspace::spanned_by(&f, 9, [id.as_flat(), sing.as_flat()]).unwrap();
        let mut rng = LabRng::from_seed(99);
        let m = random_invertible_in(&s, &mut rng, 20).unwrap();
        assert!(m.is_invertible());
        assert!(s.contains(m.as_flat()).unwrap());
    }
}
