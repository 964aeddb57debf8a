//! Brute-force oracles used by the acceptance suite.
//!
//! Each oracle recomputes a library result by enumeration, sharing no code
//! with the routine it checks.

use std::collections::HashSet;

use ae_lab::ffield::{Gf, Matrix, Subspace};

/// Every subspace of GF(2)^d, as membership bitmasks over the 2^d vectors
/// (bit `v` set iff the vector with coordinate bits `v` is a member).
pub fn gf2_subspaces(d: usize) -> Vec<u64> {
    assert!(d <= 6, "membership masks hold at most 64 vectors");
    let mut seen: HashSet<u64> = HashSet::from([1]);
    let mut queue = vec![1u64];
    while let Some(members) = queue.pop() {
        for v in 1..(1u64 << d) {
            if members >> v & 1 == 1 {
                continue;
            }
            let mut grown = members;
            for x in 0..(1u64 << d) {
                if members >> x & 1 == 1 {
                    grown |= 1 << (x ^ v);
                }
            }
            if seen.insert(grown) {
                queue.push(grown);
            }
        }
    }
    let mut all: Vec<u64> = seen.into_iter().collect();
    all.sort_unstable();
    all
}

/// Coordinates of the GF(2) vector packed in `v`.
pub fn gf2_vector(v: u64, d: usize) -> Vec<u32> {
    (0..d).map(|i| (v >> i & 1) as u32).collect()
}

/// The subspace whose members are the set bits of `mask`.
pub fn gf2_subspace(f: &Gf, d: usize, mask: u64) -> Subspace {
    let vs: Vec<Vec<u32>> = (0..(1u64 << d)).filter(|v| mask >> v & 1 == 1).map(|v| gf2_vector(v, d)).collect();
    Subspace::spanned_by(f, d, vs.iter().map(Vec::as_slice)).expect("vectors of length d")
}

/// Membership mask of a GF(2) subspace, by summing every subset of its basis.
pub fn gf2_members(s: &Subspace) -> u64 {
    let basis: Vec<u64> =
        s.basis().iter().map(|b| b.iter().enumerate().map(|(i, &c)| u64::from(c) << i).sum()).collect();
    let mut mask = 0u64;
    for combo in 0..(1u64 << basis.len()) {
        let v = basis.iter().enumerate().filter(|(i, _)| combo >> i & 1 == 1).fold(0, |acc, (_, &b)| acc ^ b);
        mask |= 1 << v;
    }
    mask
}

/// Σ c_i m^i with each power built by repeated multiplication.
pub fn power_sum(f: &Gf, coeffs: &[u32], m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut total = Matrix::zero(f, n, n);
    for (i, &c) in coeffs.iter().enumerate() {
        let mut power = Matrix::identity(f, n);
        for _ in 0..i {
            power = power.mul(m).expect("square");
        }
        total = total.add(&power.scale(c)).expect("same shape");
    }
    total
}

/// All permutations of 1..=n in image notation.
pub fn all_images(n: usize) -> Vec<Vec<usize>> {
    let mut perms = vec![vec![]];
    for _ in 0..n {
        perms = perms
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                let free: Vec<usize> = (1..=n).filter(|x| !p.contains(x)).collect();
                free.into_iter().map(move |x| [p.clone(), vec![x]].concat())
            })
            .collect();
    }
    perms
}
