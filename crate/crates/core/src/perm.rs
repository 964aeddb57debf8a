//! Permutations of `{1..N}` under the right-action convention.
//!
//! `compose(a, b)` applies `a` first and then `b`, so a braid word's
//! permutation is the left-to-right product of its letters' transpositions.
//! Points are 1-based in every public input and output; the image table is
//! 0-based internally.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("permutations act on different point sets ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("image table {0:?} is not a bijection of 1..=n")]
    NotBijection(Vec<usize>),
    #[error("point {point} is outside 1..={n}")]
    PointOutOfRange { point: usize, n: usize },
    #[error("permutations on more than {max} points are not supported")]
    TooLarge { max: usize },
}

pub const MAX_POINTS: usize = u16::MAX as usize;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<u16>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.images_one_based())
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_POINTS);
        Permutation { image: (0..n as u16).collect() }
    }

    /// From a 1-based image table: `images[i-1]` is where `i` goes.
    pub fn from_images(images: &[usize]) -> Result<Self, PermError> {
        let n = images.len();
        if n > MAX_POINTS {
            return Err(PermError::TooLarge { max: MAX_POINTS });
        }
        let mut seen = vec![false; n];
        for &x in images {
            if x == 0 || x > n || seen[x - 1] {
                return Err(PermError::NotBijection(images.to_vec()));
            }
            seen[x - 1] = true;
        }
        Ok(Permutation { image: images.iter().map(|&x| (x - 1) as u16).collect() })
    }

    /// Product of disjoint or overlapping cycles, applied left to right.
    /// Each cycle `(a b c)` sends `a→b→c→a`; points are 1-based.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut acc = Permutation::identity(n);
        for cycle in cycles {
            let mut image: Vec<u16> = (0..n as u16).collect();
            let mut seen = BTreeSet::new();
            for (j, &pt) in cycle.iter().enumerate() {
                if pt == 0 || pt > n {
                    return Err(PermError::PointOutOfRange { point: pt, n });
                }
                if !seen.insert(pt) {
                    return Err(PermError::NotBijection(cycle.clone()));
                }
                image[pt - 1] = (cycle[(j + 1) % cycle.len()] - 1) as u16;
            }
            acc = acc.compose(&Permutation { image })?;
        }
        Ok(acc)
    }

    /// The simple transposition `σ_i` swapping `i` and `i+1` (1-based `i`).
    pub fn simple_transposition(n: usize, i: usize) -> Result<Self, PermError> {
        if i == 0 || i >= n {
            return Err(PermError::PointOutOfRange { point: i, n });
        }
        let mut p = Permutation::identity(n);
        p.image.swap(i - 1, i);
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    /// Image of a 0-based point.
    #[inline]
    pub fn apply0(&self, i: usize) -> usize {
        self.image[i] as usize
    }

    /// Image of a 1-based point.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1] as usize + 1
    }

    pub fn images_one_based(&self) -> Vec<usize> {
        self.image.iter().map(|&x| x as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// `a` then `b`.
    pub fn compose(&self, b: &Permutation) -> Result<Permutation, PermError> {
        if self.n() != b.n() {
            return Err(PermError::SizeMismatch(self.n(), b.n()));
        }
        Ok(self.then(b))
    }

    /// Unchecked `compose` for callers that already agree on `n`.
    #[inline]
    pub(crate) fn then(&self, b: &Permutation) -> Permutation {
        debug_assert_eq!(self.n(), b.n());
        Permutation { image: self.image.iter().map(|&x| b.image[x as usize]).collect() }
    }

    /// In-place right multiplication by the simple transposition `σ_i`
    /// (0-based `i`): swaps the values `i` and `i+1` in the image table.
    #[inline]
    pub(crate) fn then_swap(&mut self, i: usize) {
        for x in self.image.iter_mut() {
            if *x as usize == i {
                *x += 1;
            } else if *x as usize == i + 1 {
                *x -= 1;
            }
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0u16; self.n()];
        for (i, &x) in self.image.iter().enumerate() {
            image[x as usize] = i as u16;
        }
        Permutation { image }
    }

    /// `self^e` for any integer `e`.
    pub fn pow(&self, e: i64) -> Permutation {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Permutation::identity(self.n());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&sq);
            }
            sq = sq.then(&sq);
            e >>= 1;
        }
        acc
    }

    /// Canonical cycles: least point first, sorted by least point, fixed points omitted.
    pub fn cycle_decompose(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] || self.image[start] as usize == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.image[x] as usize;
            }
            cycles.push(cycle);
        }
        cycles
    }

    fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.image[x] as usize;
                len += 1;
            }
            lengths.push(len);
        }
        lengths
    }

    /// Least positive `r` with `self^r = id`: the lcm of the cycle lengths.
    pub fn order(&self) -> u128 {
        self.cycle_lengths().into_iter().fold(1u128, |acc, l| lcm(acc, l as u128))
    }

    /// Whether `self == b^e` for some `e` in `1..=order(b)`.
    pub fn is_power_of(&self, b: &Permutation) -> bool {
        if self.n() != b.n() {
            return false;
        }
        let ord = b.order();
        let mut acc = b.clone();
        let mut e = 1u128;
        loop {
            if &acc == self {
                return true;
            }
            if e >= ord {
                return false;
            }
            acc = acc.then(b);
            e += 1;
        }
    }

    /// Points moved by the permutation, 1-based.
    pub fn support(&self) -> BTreeSet<usize> {
        self.image.iter().enumerate().filter(|&(i, &x)| i != x as usize).map(|(i, _)| i + 1).collect()
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u128, b: u128) -> u128 {
    a / gcd(a, b) * b
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.images_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Permutation::from_images(&images).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::LabRng;
    use proptest::prelude::*;

    fn random_perm(n: usize, rng: &mut LabRng) -> Permutation {
        let mut v: Vec<usize> = (1..=n).collect();
        rng.shuffle(&mut v);
        Permutation::from_images(&v).unwrap()
    }

    fn s(n: usize, i: usize) -> Permutation {
        Permutation::simple_transposition(n, i).unwrap()
    }

    #[test]
    fn composition_convention() {
        let p = s(3, 1).compose(&s(3, 2)).unwrap();
        assert_eq!(p.apply(1), 3);
        assert_eq!(p.apply(2), 1);
        assert_eq!(p.apply(3), 2);
        let mut q = s(3, 1);
        q.then_swap(1);
        assert_eq!(q, p);
    }

    #[test]
    fn identity_and_inverse() {
        let mut rng = LabRng::from_seed(1);
        let a = random_perm(9, &mut rng);
        assert_eq!(a.compose(&Permutation::identity(9)).unwrap(), a);
        assert!(a.compose(&a.inverse()).unwrap().is_identity());
        assert!(a.inverse().compose(&a).unwrap().is_identity());
        assert!(a.compose(&Permutation::identity(8)).is_err());
    }

    #[test]
    fn orders() {
        assert_eq!(Permutation::identity(5).order(), 1);
        assert_eq!(s(5, 2).order(), 2);
        let p = Permutation::from_cycles(8, &[vec![1, 2, 3], vec![4, 5, 6, 7, 8]]).unwrap();
        assert_eq!(p.order(), 15);
    }

    #[test]
    fn cycles_are_canonical() {
        assert!(Permutation::identity(4).cycle_decompose().is_empty());
        let t = Permutation::from_cycles(6, &[vec![5, 2]]).unwrap();
        assert_eq!(t.cycle_decompose(), vec![vec![2, 5]]);
        let p = Permutation::from_cycles(7, &[vec![6, 4, 7], vec![3, 1]]).unwrap();
        assert_eq!(p.cycle_decompose(), vec![vec![1, 3], vec![4, 7, 6]]);
    }

    #[test]
    fn powers() {
        let c = Permutation::from_cycles(5, &[vec![1, 2, 3, 4, 5]]).unwrap();
        assert!(Permutation::identity(5).is_power_of(&c));
        assert!(c.pow(2).is_power_of(&c));
        assert!(c.pow(-1).is_power_of(&c));
        // (1 3 2 4 5) is not a power of (1 2 3 4 5): check e = 1..4 directly
        let d = Permutation::from_cycles(5, &[vec![1, 3, 2, 4, 5]]).unwrap();
        assert!((1..5).all(|e| c.pow(e) != d));
        assert!(!d.is_power_of(&c));
        assert!(!c.is_power_of(&d));
    }

    #[test]
    fn supports() {
        assert!(Permutation::identity(4).support().is_empty());
        let c = Permutation::from_cycles(5, &[vec![1, 2, 3]]).unwrap();
        assert_eq!(c.support(), BTreeSet::from([1, 2, 3]));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Permutation::from_images(&[1, 1, 2]).is_err());
        assert!(Permutation::from_images(&[0, 1]).is_err());
        assert!(Permutation::from_cycles(3, &[vec![1, 4]]).is_err());
        assert!(Permutation::simple_transposition(3, 3).is_err());
    }

    #[test]
    fn order_is_exact_for_small_n() {
        let mut rng = LabRng::from_seed(17);
        for _ in 0..300 {
            let n = rng.range_inclusive(1, 10);
            let a = random_perm(n, &mut rng);
            let r = a.order();
            assert!(a.pow(r as i64).is_identity());
            for d in 1..r {
                if r.is_multiple_of(d) {
                    assert!(!a.pow(d as i64).is_identity());
                }
            }
            let fact: u128 = (1..=n as u128).product();
            assert_eq!(fact % r, 0);
        }
    }

    #[test]
    fn serializes_one_based() {
        let p = s(3, 1);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[2,1,3]");
        let back: Permutation = serde_json::from_str("[2,1,3]").unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Permutation>("[2,2,3]").is_err());
    }

    proptest! {
        #[test]
        fn compose_is_associative(seed in any::<u64>(), n in 1usize..12) {
            let mut rng = LabRng::from_seed(seed);
            let (a, b, c) = (random_perm(n, &mut rng), random_perm(n, &mut rng), random_perm(n, &mut rng));
            prop_assert_eq!(a.then(&b).then(&c), a.then(&b.then(&c)));
        }

        #[test]
        fn cycles_recompose(seed in any::<u64>(), n in 1usize..16) {
            let mut rng = LabRng::from_seed(seed);
            let a = random_perm(n, &mut rng);
            let back = Permutation::from_cycles(n, &a.cycle_decompose()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
