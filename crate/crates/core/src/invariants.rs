//! Randomized invariant checks of the representation, used by `ae-lab verify`.

use serde::{Deserialize, Serialize};

use crate::braid::{random_word, BraidWord};
use crate::emult::{braid_relation_check, braid_relation_check_from, emult, EMultPair, TValues};
use crate::ffield::{Gf, Matrix};
use crate::perm::Permutation;
use crate::rng::SeedTree;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub q: u64,
    pub max_n: usize,
    /// Random t-value sets per strand count for the relation checks.
    pub tvalue_sets: usize,
    /// Randomized cases for each action property.
    pub action_cases: usize,
    pub max_word_len: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { q: 32, max_n: 8, tvalue_sets: 100, action_cases: 10_000, max_word_len: 12 }
    }
}

fn random_start(f: &Gf, n: usize, rng: &mut crate::rng::LabRng) -> EMultPair {
    let mut images: Vec<usize> = (1..=n).collect();
    rng.shuffle(&mut images);
    EMultPair {
        matrix: Matrix::random_invertible(f, n, rng),
        perm: Permutation::from_images(&images).expect("shuffled identity"),
    }
}

fn all_generators(n: usize) -> Vec<usize> {
    (1..n).collect()
}

/// Runs the relation, far-commutation, homomorphism and inverse-cancellation
/// checks. Each check draws from its own seed stream.
pub fn run_suite(config: &SuiteConfig, seed: u64) -> Vec<CheckReport> {
    let f = Gf::for_order(config.q).expect("suite field order");
    let seeds = SeedTree::root(seed).child("verify");
    let mut reports = Vec::new();

    let mut rng = seeds.child("relations").rng();
    let mut rel = CheckReport { name: "braid relations from (I, id)".into(), cases: 0, failures: 0 };
    let mut twisted = CheckReport { name: "braid relations from random pairs".into(), cases: 0, failures: 0 };
    for n in 3..=config.max_n {
        for _ in 0..config.tvalue_sets {
            let t = TValues::random(&f, n, &mut rng);
            let start = random_start(&f, n, &mut rng);
            for i in 1..n - 1 {
                rel.cases += 1;
                rel.failures += u64::from(!braid_relation_check(&t, i).expect("i in range"));
                twisted.cases += 1;
                twisted.failures += u64::from(!braid_relation_check_from(&t, &start, i).expect("i in range"));
            }
        }
    }
    reports.push(rel);
    reports.push(twisted);

    let mut rng = seeds.child("action").rng();
    let mut hom = CheckReport { name: "homomorphism: (s ⋆ u) ⋆ v = s ⋆ uv".into(), cases: 0, failures: 0 };
    let mut cancel =
        CheckReport { name: "inverse cancellation: (s ⋆ w) ⋆ w⁻¹ = s".into(), cases: 0, failures: 0 };
    for _ in 0..config.action_cases {
        let n = rng.range_inclusive(2, config.max_n);
        let t = TValues::random(&f, n, &mut rng);
        let start = random_start(&f, n, &mut rng);
        let gens = all_generators(n);
        let word = |rng: &mut crate::rng::LabRng| {
            let len = rng.range_inclusive(0, config.max_word_len);
            random_word(n, len, &gens, rng).expect("generators in range")
        };
        let u = word(&mut rng);
        let v = word(&mut rng);
        let uv = BraidWord::new(n, [u.letters(), v.letters()].concat()).expect("same strand count");
        let lhs = emult(&emult(&start, &u, &t).expect("compatible"), &v, &t).expect("compatible");
        hom.cases += 1;
        hom.failures += u64::from(lhs != emult(&start, &uv, &t).expect("compatible"));
        let back = emult(&emult(&start, &u, &t).expect("compatible"), &u.inverse(), &t).expect("compatible");
        cancel.cases += 1;
        cancel.failures += u64::from(back != start);
    }
    reports.push(hom);
    reports.push(cancel);
    reports
}
