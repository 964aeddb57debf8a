//! High-order permutation sets and defense-distribution systems.
//!
//! Each `ρ_i` is a product of disjoint cycles, one of every odd prime length
//! `3, 5, 7, …, p_N`, so its order is the product of those primes. All `ρ_i`
//! use the same point block for a given prime, and for primes `p >= 5` no two
//! of their `p`-cycles are powers of one another. For `p = 3` every pair of
//! 3-cycles on a block is related by inversion, so that condition is dropped
//! there and a warning is recorded on the set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aedh::{conjugate_all, AedhError, SystemParams, SystemSecrets};
use crate::braid::{braid_preimage, random_index_word, random_word, BraidWord};
use crate::perm::Permutation;
use crate::rng::LabRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DefenseError {
    #[error("no odd prime fits into {0} points")]
    TooFewPoints(usize),
    #[error("the set needs at least two permutations, got {0}")]
    TooFewPermutations(usize),
    #[error("cycles of total length {needed} do not fit into {n} points")]
    DoesNotFit { needed: usize, n: usize },
    #[error("could not find {k} mutually non-power {p}-cycles after {retries} retries")]
    PowerClassesExhausted { p: usize, k: usize, retries: usize },
    #[error("set is built for {set} strands but the system has {system}")]
    StrandMismatch { set: usize, system: usize },
    #[error("support reaches strand {support}; the second user's band needs strands above it (n = {n})")]
    NoRoomForSecondBand { support: usize, n: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Aedh(#[from] AedhError),
}

/// How the prime-sum condition is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimeSumReading {
    /// The included primes `3..=p_N` together sum to at most `N`.
    #[default]
    Inclusive,
    /// `p_N` is the largest prime whose smaller odd primes sum to at most `N`;
    /// the cycles may then need more than `N` points.
    Literal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeBudget {
    pub n: usize,
    pub reading: PrimeSumReading,
    pub primes: Vec<usize>,
    pub p_max: usize,
    /// Product of the included primes (decimal string in JSON).
    #[serde(with = "u128_string")]
    pub order_product: u128,
}

impl PrimeBudget {
    pub fn points_needed(&self) -> usize {
        self.primes.iter().sum()
    }

    pub fn fits(&self) -> bool {
        self.points_needed() <= self.n
    }
}

pub(crate) mod u128_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn odd_primes() -> impl Iterator<Item = usize> {
    (3..).step_by(2).filter(|&p| is_prime(p))
}

/// `prime_budget` under the inclusive reading.
pub fn prime_budget(n: usize) -> Result<PrimeBudget, DefenseError> {
    prime_budget_with(n, PrimeSumReading::Inclusive)
}

pub fn prime_budget_with(n: usize, reading: PrimeSumReading) -> Result<PrimeBudget, DefenseError> {
    if n < 3 {
        return Err(DefenseError::TooFewPoints(n));
    }
    let mut primes = Vec::new();
    let mut below = 0usize;
    for p in odd_primes() {
        let admit = match reading {
            PrimeSumReading::Inclusive => below + p <= n,
            PrimeSumReading::Literal => below <= n,
        };
        if !admit {
            break;
        }
        primes.push(p);
        below += p;
    }
    let p_max = *primes.last().expect("3 always fits when n >= 3");
    let order_product = primes.iter().map(|&p| p as u128).product();
    Ok(PrimeBudget { n, reading, primes, p_max, order_product })
}

/// The permutations `ρ_1..ρ_k` and the point block used for each prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighOrderPermSet {
    pub n: usize,
    pub k: usize,
    pub rhos: Vec<Permutation>,
    /// `blocks[j]` holds the 1-based points of the cycles of length `budget.primes[j]`.
    pub blocks: Vec<Vec<usize>>,
    pub budget: PrimeBudget,
    pub warnings: Vec<String>,
}

/// Rejection retries per cycle when enforcing power-freeness.
const POWER_RETRIES: usize = 1000;

/// `gen_high_order_perms` with every block inside the first `Σ p` points.
pub fn gen_high_order_perms(n: usize, k: usize, rng: &mut LabRng) -> Result<HighOrderPermSet, DefenseError> {
    gen_high_order_perms_with(prime_budget(n)?, k, rng)
}

/// Like [`gen_high_order_perms`] but sizes the prime budget for `n - reserve`
/// points, leaving the top `reserve` strands free for the other user's band.
pub fn gen_high_order_perms_reserving(
    n: usize,
    reserve: usize,
    k: usize,
    rng: &mut LabRng,
) -> Result<HighOrderPermSet, DefenseError> {
    let mut budget = prime_budget(n.saturating_sub(reserve))?;
    budget.n = n;
    gen_high_order_perms_with(budget, k, rng)
}

pub fn gen_high_order_perms_with(
    budget: PrimeBudget,
    k: usize,
    rng: &mut LabRng,
) -> Result<HighOrderPermSet, DefenseError> {
    let n = budget.n;
    if k < 2 {
        return Err(DefenseError::TooFewPermutations(k));
    }
    let needed = budget.points_needed();
    if needed > n {
        return Err(DefenseError::DoesNotFit { needed, n });
    }
    let mut warnings = Vec::new();
    if budget.primes.len() == 1 {
        warnings.push(format!("only the prime 3 fits into {n} points; the set has order 3"));
    }

    // random partition of 1..=needed into consecutive-size blocks
    let mut points: Vec<usize> = (1..=needed).collect();
    rng.shuffle(&mut points);
    let mut blocks = Vec::with_capacity(budget.primes.len());
    let mut at = 0;
    for &p in &budget.primes {
        blocks.push(points[at..at + p].to_vec());
        at += p;
    }

    let mut cycles: Vec<Vec<Permutation>> = vec![Vec::with_capacity(budget.primes.len()); k];
    for (block, &p) in blocks.iter().zip(&budget.primes) {
        if p == 3 && k >= 2 {
            warnings.push(
                "3-cycles on one block are all powers of each other; power-freeness is not enforced for p = 3"
                    .to_string(),
            );
        }
        let mut chosen: Vec<Permutation> = Vec::with_capacity(k);
        for _ in 0..k {
            let mut retries = 0;
            let c = loop {
                let mut order = block.clone();
                rng.shuffle(&mut order);
                let c = Permutation::from_cycles(n, &[order]).expect("block points are in range");
                if p == 3 || chosen.iter().all(|d| !c.is_power_of(d)) {
                    break c;
                }
                retries += 1;
                if retries >= POWER_RETRIES {
                    return Err(DefenseError::PowerClassesExhausted { p, k, retries });
                }
            };
            chosen.push(c);
        }
        for (i, c) in chosen.into_iter().enumerate() {
            cycles[i].push(c);
        }
    }
    let rhos = cycles.iter().map(|cs| cs.iter().fold(Permutation::identity(n), |acc, c| acc.then(c))).collect();
    let set = HighOrderPermSet { n, k, rhos, blocks, budget, warnings };
    set.validate()?;
    Ok(set)
}

impl HighOrderPermSet {
    /// The cycle of `ρ_i` (0-based `i`) on the block of the `j`-th prime.
    pub fn cycle(&self, i: usize, j: usize) -> Permutation {
        let block = &self.blocks[j];
        let cycle: Vec<usize> =
            self.rhos[i].cycle_decompose().into_iter().find(|c| block.contains(&c[0])).unwrap_or_default();
        Permutation::from_cycles(self.n, &[cycle]).expect("cycle of a valid permutation")
    }

    /// Largest point moved by any `ρ_i`.
    pub fn max_support_point(&self) -> usize {
        self.blocks.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Checks disjointness, shared blocks, power-freeness for `p >= 5`, and the order.
    pub fn validate(&self) -> Result<(), DefenseError> {
        let bad = |m: String| Err(DefenseError::Invariant(m));
        if self.rhos.len() != self.k || self.blocks.len() != self.budget.primes.len() {
            return bad("set shape disagrees with k or the prime budget".into());
        }
        for (i, rho) in self.rhos.iter().enumerate() {
            let cycles = rho.cycle_decompose();
            if cycles.len() != self.budget.primes.len() {
                return bad(format!("rho_{} has {} cycles", i + 1, cycles.len()));
            }
            for (block, &p) in self.blocks.iter().zip(&self.budget.primes) {
                let Some(c) = cycles.iter().find(|c| block.contains(&c[0])) else {
                    return bad(format!("rho_{} has no cycle on the {p}-block", i + 1));
                };
                let mut got = c.clone();
                got.sort_unstable();
                let mut want = block.clone();
                want.sort_unstable();
                if got != want || c.len() != p {
                    return bad(format!("rho_{}'s {p}-cycle does not occupy its block", i + 1));
                }
            }
            if rho.order() != self.budget.order_product {
                return bad(format!("rho_{} has order {}", i + 1, rho.order()));
            }
        }
        for (j, &p) in self.budget.primes.iter().enumerate() {
            if p == 3 {
                continue;
            }
            for a in 0..self.k {
                for b in 0..self.k {
                    if a != b && self.cycle(a, j).is_power_of(&self.cycle(b, j)) {
                        return bad(format!("c_{}({p}) is a power of c_{}({p})", a + 1, b + 1));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Word-order histogram for random short words over a permutation set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderStats {
    pub n: usize,
    pub word_len: usize,
    pub samples: u64,
    /// order → count, orders as decimal strings
    pub histogram: BTreeMap<String, u64>,
    /// `N`
    pub threshold_n: f64,
    /// `exp(½ √(N ln N))`
    pub threshold_exp: f64,
    pub fraction_above_n: f64,
    pub fraction_above_exp: f64,
}

pub fn exp_threshold(n: usize) -> f64 {
    let n = n as f64;
    (0.5 * (n * n.ln()).sqrt()).exp()
}

/// Samples words of length `1..=word_len` over the signed generators (see
/// [`random_index_word`]) and records the order of each product.
pub fn order_statistics(perms: &[Permutation], word_len: usize, samples: u64, rng: &mut LabRng) -> OrderStats {
    let n = perms[0].n();
    let inverses: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();
    let mut counts: BTreeMap<u128, u64> = BTreeMap::new();
    for _ in 0..samples {
        let word = random_index_word(perms.len(), word_len, rng);
        let mut p = Permutation::identity(n);
        for &j in &word {
            let idx = j.unsigned_abs() as usize - 1;
            p = p.then(if j > 0 { &perms[idx] } else { &inverses[idx] });
        }
        *counts.entry(p.order()).or_default() += 1;
    }
    let threshold_n = n as f64;
    let threshold_exp = exp_threshold(n);
    let above = |t: f64| counts.iter().filter(|(&o, _)| o as f64 > t).map(|(_, &c)| c).sum::<u64>();
    let frac = |c: u64| if samples == 0 { 0.0 } else { c as f64 / samples as f64 };
    OrderStats {
        n,
        word_len,
        samples,
        fraction_above_n: frac(above(threshold_n)),
        fraction_above_exp: frac(above(threshold_exp)),
        histogram: counts.into_iter().map(|(o, c)| (o.to_string(), c)).collect(),
        threshold_n,
        threshold_exp,
    }
}

/// Rebuilds a system so that Alice's published conjugates project onto the
/// `ρ_i` (conjugated by `σ_z`).
///
/// Alice's base words become positive braid preimages of the `ρ_i`. Those use
/// generators below the largest support point `S`, so Bob's base words are
/// redrawn in the band `S+1..=N-1` to keep the two sets commuting; both sets
/// are conjugated by the existing `z`.
pub fn defense_conjugates(
    params: &SystemParams,
    secrets: &SystemSecrets,
    set: &HighOrderPermSet,
    rng: &mut LabRng,
) -> Result<(SystemParams, SystemSecrets), DefenseError> {
    let n = params.n;
    if set.n != n {
        return Err(DefenseError::StrandMismatch { set: set.n, system: n });
    }
    let support = set.max_support_point();
    if support + 2 > n {
        return Err(DefenseError::NoRoomForSecondBand { support, n });
    }
    let alice_base: Vec<BraidWord> = set.rhos.iter().map(braid_preimage).collect();
    let upper: Vec<usize> = (support + 1..n).collect();
    let bob_base = (0..secrets.bob_base.len())
        .map(|_| random_word(n, params.base_word_len, &upper, rng))
        .collect::<Result<Vec<_>, _>>()
        .map_err(AedhError::from)?;
    let z = secrets.z.clone();
    let params = SystemParams {
        alice_conjugates: conjugate_all(n, &z, &alice_base)?,
        bob_conjugates: conjugate_all(n, &z, &bob_base)?,
        ..params.clone()
    };
    params.validate()?;
    Ok((params, SystemSecrets { z, alice_base, bob_base }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aedh::{default_z_len, gen_system, run_exchange, DEFAULT_BASE_WORD_LEN};
    use crate::ffield::Gf;

    /// Running-sum enumeration of odd primes by trial division.
    fn budget_oracle(n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut sum = 0;
        let mut p = 3;
        loop {
            if (2..p).all(|d| p % d != 0) {
                if sum + p > n {
                    return out;
                }
                sum += p;
                out.push(p);
            }
            p += 2;
        }
    }

    #[test]
    fn budgets_match_enumeration() {
        let b = prime_budget(8).unwrap();
        assert_eq!((b.primes.clone(), b.p_max, b.order_product), (vec![3, 5], 5, 15));
        let b = prime_budget(16).unwrap();
        assert_eq!((b.primes.clone(), b.p_max, b.order_product), (vec![3, 5, 7], 7, 105));
        let b = prime_budget(32).unwrap();
        assert_eq!((b.primes.clone(), b.order_product), (vec![3, 5, 7, 11], 1155));
        for n in 3..200 {
            let b = prime_budget(n).unwrap();
            assert_eq!(b.primes, budget_oracle(n));
            assert!(b.fits());
            let next = odd_primes().find(|&p| p > b.p_max).unwrap();
            assert!(b.points_needed() + next > n);
        }
        assert!(prime_budget(2).is_err());
    }

    #[test]
    fn literal_reading_can_overflow() {
        let b = prime_budget_with(8, PrimeSumReading::Literal).unwrap();
        assert_eq!(b.primes, vec![3, 5, 7]);
        assert!(!b.fits());
        let mut rng = LabRng::from_seed(1);
        assert!(matches!(gen_high_order_perms_with(b, 2, &mut rng), Err(DefenseError::DoesNotFit { .. })));
    }

    #[test]
    fn generated_sets_satisfy_the_invariants() {
        let mut rng = LabRng::from_seed(2);
        for (n, product) in [(8, 15u128), (16, 105), (32, 1155), (64, 255_255)] {
            for k in [2, 4] {
                let set = gen_high_order_perms(n, k, &mut rng).unwrap();
                assert!(set.validate().is_ok());
                for rho in &set.rhos {
                    assert_eq!(rho.order(), product);
                }
                assert!(set.warnings.iter().any(|w| w.contains("p = 3")));
            }
        }
    }

    #[test]
    fn rho_structure_at_small_n() {
        let mut rng = LabRng::from_seed(3);
        let set = gen_high_order_perms(8, 2, &mut rng).unwrap();
        for rho in &set.rhos {
            let lens: Vec<usize> = rho.cycle_decompose().iter().map(Vec::len).collect();
            let mut sorted = lens.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![3, 5]);
        }
        let set = gen_high_order_perms(16, 3, &mut rng).unwrap();
        for rho in &set.rhos {
            assert_eq!(rho.support().len(), 15);
        }
    }

    #[test]
    fn power_freeness_exhaustive() {
        let mut rng = LabRng::from_seed(4);
        let set = gen_high_order_perms(32, 4, &mut rng).unwrap();
        for (j, &p) in set.budget.primes.iter().enumerate().filter(|(_, &p)| p >= 5) {
            for a in 0..4 {
                for b in 0..4 {
                    if a == b {
                        continue;
                    }
                    let (ca, cb) = (set.cycle(a, j), set.cycle(b, j));
                    assert!((1..p as i64).all(|e| cb.pow(e) != ca));
                }
            }
        }
    }

    #[test]
    fn too_many_permutations_exhaust_power_classes() {
        // five-cycles on one block fall into (5-2)! = 6 power classes
        let mut rng = LabRng::from_seed(5);
        assert!(matches!(gen_high_order_perms(8, 7, &mut rng), Err(DefenseError::PowerClassesExhausted { p: 5, .. })));
        assert!(gen_high_order_perms(8, 6, &mut rng).is_ok());
        assert!(matches!(gen_high_order_perms(8, 1, &mut rng), Err(DefenseError::TooFewPermutations(1))));
    }

    #[test]
    fn statistics_of_trivial_words() {
        let mut rng = LabRng::from_seed(6);
        let set = gen_high_order_perms(16, 4, &mut rng).unwrap();
        let single = order_statistics(&set.rhos[..1], 1, 50, &mut rng);
        assert_eq!(single.histogram, BTreeMap::from([("105".to_string(), 50)]));
        assert_eq!(single.fraction_above_n, 1.0);
        let rho = &set.rhos[0];
        assert_eq!(rho.then(&rho.inverse()).order(), 1);
    }

    #[test]
    fn order_growth_is_monotone() {
        let products: Vec<u128> = [8, 16, 32, 64].iter().map(|&n| prime_budget(n).unwrap().order_product).collect();
        assert!(products.windows(2).all(|w| w[0] < w[1]));
        assert!(exp_threshold(32) > 150.0 && exp_threshold(32) < 250.0);
    }

    #[test]
    fn conjugation_preserves_order_statistics() {
        let mut rng = LabRng::from_seed(7);
        let set = gen_high_order_perms(16, 4, &mut rng).unwrap();
        let mut v: Vec<usize> = (1..=16).collect();
        rng.shuffle(&mut v);
        let s = Permutation::from_images(&v).unwrap();
        let conj: Vec<Permutation> = set.rhos.iter().map(|r| s.then(r).then(&s.inverse())).collect();
        let a = order_statistics(&set.rhos, 10, 2000, &mut LabRng::from_seed(8));
        let b = order_statistics(&conj, 10, 2000, &mut LabRng::from_seed(8));
        assert_eq!(a.histogram, b.histogram);
    }

    #[test]
    fn defense_system_keeps_the_protocol_working() {
        let f = Gf::for_order(32).unwrap();
        let mut rng = LabRng::from_seed(9);
        let (params, secrets) = gen_system(20, &f, 4, 4, DEFAULT_BASE_WORD_LEN, default_z_len(20), &mut rng).unwrap();
        let set = gen_high_order_perms_reserving(20, 2, 4, &mut rng).unwrap();
        assert_eq!(set.budget.primes, vec![3, 5, 7]);
        let (dp, ds) = defense_conjugates(&params, &secrets, &set, &mut rng).unwrap();
        assert!(dp.validate().is_ok());
        let sz = ds.z.permutation();
        for (w, rho) in dp.alice_conjugates.words().iter().zip(&set.rhos) {
            let want = sz.then(rho).then(&sz.inverse());
            assert_eq!(w.permutation(), want);
            assert_eq!(w.permutation().order(), 105);
        }
        let ex = run_exchange(&dp, 8, 19, &mut rng.clone(), &mut LabRng::from_seed(10)).unwrap();
        assert!(ex.agrees());
    }

    #[test]
    fn defense_needs_room_for_the_second_band() {
        let f = Gf::for_order(32).unwrap();
        let mut rng = LabRng::from_seed(11);
        let (params, secrets) = gen_system(16, &f, 4, 4, 10, 32, &mut rng).unwrap();
        let set = gen_high_order_perms(16, 4, &mut rng).unwrap();
        assert!(matches!(
            defense_conjugates(&params, &secrets, &set, &mut rng),
            Err(DefenseError::NoRoomForSecondBand { support: 15, n: 16 })
        ));
        let other = gen_high_order_perms(20, 4, &mut rng).unwrap();
        assert!(matches!(
            defense_conjugates(&params, &secrets, &other, &mut rng),
            Err(DefenseError::StrandMismatch { .. })
        ));
    }
}
