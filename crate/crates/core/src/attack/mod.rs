//! Shared-secret recovery from public data.
//!
//! The attacker factors Alice's public key as `c̃ · (α′, 1) ⋆ (ã, g)` and
//! rebuilds the shared secret as `K = c̃ · (q β′, h) ⋆ (ã, g)`:
//!
//! 1. *Precompute*: sample short words in Alice's conjugates whose
//!    permutation has order `r ≤ N`; their `r`-th powers are pure braids, and
//!    their images span a subspace `V` of `M_N(F_q)`.
//! 2. *Stage 1*: find a word `u` in the conjugates with permutation `g`
//!    ([`search::find_word`]) and set `(γ, 1) = (p, g) ⋆ u^{-1}`.
//! 3. *Stage 2*: pick an invertible `c̃` in `C ∩ γV`, where `C = F_q[m0]`.
//! 4. *Stage 3*: write `α′ = c̃^{-1} γ = Σ λ_i Π(α_i)` and twist the same
//!    combination by `h` to get `β′`.
//!
//! No private key type is reachable from [`AttackInput`].

pub mod search;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aedh::{PublicKey, SystemParams};
use crate::braid::{random_index_word, ConjugateSet};
use crate::emult::{emult, EMultPair, TValues};
use crate::ffield::{random_invertible_in, solve_combination, subspace_intersect, Gf, Matrix, Subspace};
use crate::rng::LabRng;
use search::{find_word, SearchOutcome};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
}

/// Everything the attacker sees: system data and both public keys.
#[derive(Clone, Debug)]
pub struct AttackInput {
    pub n: usize,
    pub field: Gf,
    pub m0: Matrix,
    pub tvalues: TValues,
    pub alice_conjugates: ConjugateSet,
    pub pub_a: EMultPair,
    pub pub_b: EMultPair,
}

impl AttackInput {
    /// Refuses to build unless every public item is present.
    pub fn new(
        params: Option<&SystemParams>,
        pub_a: Option<&PublicKey>,
        pub_b: Option<&PublicKey>,
    ) -> Result<Self, AttackError> {
        let params = params.ok_or(AttackError::Missing("system parameters"))?;
        let pub_a = pub_a.ok_or(AttackError::Missing("public key (alice)"))?;
        let pub_b = pub_b.ok_or(AttackError::Missing("public key (bob)"))?;
        let n = params.n;
        for (who, key) in [("alice", pub_a), ("bob", pub_b)] {
            if key.pair.n() != n || key.pair.matrix.field() != &params.field {
                return Err(AttackError::Inconsistent(format!("{who}'s public key does not match the system")));
            }
        }
        if params.alice_conjugates.is_empty() {
            return Err(AttackError::Missing("alice's conjugates"));
        }
        Ok(AttackInput {
            n,
            field: params.field.clone(),
            m0: params.m0.clone(),
            tvalues: params.tvalues.clone(),
            alice_conjugates: params.alice_conjugates.clone(),
            pub_a: pub_a.pair.clone(),
            pub_b: pub_b.pair.clone(),
        })
    }

    fn identity(&self) -> EMultPair {
        EMultPair::identity(&self.field, self.n)
    }

    /// `start ⋆ (expansion of the index word)`.
    fn emult_index_word(&self, start: &EMultPair, word: &[i32]) -> EMultPair {
        let braid = self.alice_conjugates.expand(word).expect("index word over the conjugate set");
        emult(start, &braid, &self.tvalues).expect("conjugates match the strand count")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    /// Longest sampled word, in conjugates.
    pub word_len_max: usize,
    /// Largest usable permutation order; `None` means `N`.
    pub order_cap: Option<usize>,
    /// Consecutive non-growing insertions that count as stabilized.
    pub stall_threshold: usize,
    pub sample_budget: u64,
    /// Combined tree size per Stage 1 attempt.
    pub stage1_max_states: usize,
    pub stage1_restarts: usize,
    pub stage1_prefix_len: usize,
    /// Random combinations tried when looking for an invertible `c̃`.
    pub stage2_budget: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            word_len_max: 10,
            order_cap: None,
            stall_threshold: 25,
            sample_budget: 100_000,
            stage1_max_states: 400_000,
            stage1_restarts: 3,
            stage1_prefix_len: 4,
            stage2_budget: crate::ffield::DEFAULT_INVERTIBLE_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Precompute,
    Stage1,
    Stage2,
    Stage3,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Precompute => "precompute",
            Stage::Stage1 => "stage1",
            Stage::Stage2 => "stage2",
            Stage::Stage3 => "stage3",
        }
    }
}

/// Pure braids (as index words over Alice's conjugates) with independent images.
#[derive(Clone, Debug)]
pub struct PureBasis {
    pub braids: Vec<Vec<i32>>,
    pub images: Vec<Matrix>,
    pub span: Subspace,
}

/// Counters from the deterministic part of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackStats {
    pub samples: u64,
    /// Samples whose permutation order was at most the cap.
    pub low_order_samples: u64,
    /// `(sample number, dim V)` after every growth.
    pub dim_trace: Vec<(u64, usize)>,
    pub dim_v: usize,
    /// Bytes held by the basis images.
    pub basis_bytes: u64,
    pub stage1_states: u64,
    pub stage1_word_len: Option<usize>,
    pub dim_c: Option<usize>,
    pub dim_intersection: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AttackOutcome {
    Recovered(Box<Recovery>),
    Failed { stage: Stage, reason: String },
}

/// A recovered secret with the intermediate values that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recovery {
    pub k: EMultPair,
    pub stage1_word: Vec<i32>,
    pub a_tilde: Matrix,
    pub gamma: Matrix,
    pub c_tilde: Matrix,
    pub alpha_prime: Matrix,
    pub lambda: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackResult {
    pub outcome: AttackOutcome,
    pub stats: AttackStats,
}

impl AttackResult {
    pub fn recovered(&self) -> Option<&EMultPair> {
        match &self.outcome {
            AttackOutcome::Recovered(r) => Some(&r.k),
            AttackOutcome::Failed { .. } => None,
        }
    }
}

/// Wall-clock and memory measurements, kept apart from [`AttackResult`] so
/// results stay reproducible.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AttackTelemetry {
    pub stage_seconds: Vec<(Stage, f64)>,
    pub total_seconds: f64,
    /// Peak resident set of the whole process, from `/proc/self/status`.
    pub peak_rss_kb: Option<u64>,
}

pub fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrecomputeError {
    Budget { samples: u64 },
}

/// `precompute_pure_basis`. `V` is seeded with the identity (the empty word).
///
/// Returns the basis together with the stats even when the budget runs out.
pub fn precompute_pure_basis(
    input: &AttackInput,
    config: &AttackConfig,
    rng: &mut LabRng,
    stats: &mut AttackStats,
) -> Result<PureBasis, PrecomputeError> {
    let n = input.n;
    let cap = config.order_cap.unwrap_or(n) as u128;
    let f = &input.field;
    let k = input.alice_conjugates.len();
    let id = input.identity();

    let mut span = Subspace::zero(f, n * n);
    let mut braids = vec![Vec::new()];
    let mut images = vec![id.matrix.clone()];
    span.insert(id.matrix.as_flat()).expect("ambient dimension n^2");
    stats.dim_trace.push((0, 1));

    let mut stall = 0usize;
    let mut outcome = Err(PrecomputeError::Budget { samples: config.sample_budget });
    for sample in 1..=config.sample_budget {
        stats.samples = sample;
        let w = random_index_word(k, config.word_len_max, rng);
        let r = input.alice_conjugates.index_word_permutation(&w).order();
        if r > cap {
            continue;
        }
        stats.low_order_samples += 1;
        let alpha = crate::braid::free_reduce_letters(&w.repeat(r as usize));
        let image = input.emult_index_word(&id, &alpha).matrix;
        if span.insert(image.as_flat()).expect("ambient dimension n^2") {
            braids.push(alpha);
            images.push(image);
            stats.dim_trace.push((sample, span.dim()));
            stall = 0;
        } else {
            stall += 1;
            if stall >= config.stall_threshold {
                outcome = Ok(());
                break;
            }
        }
    }
    stats.dim_v = span.dim();
    stats.basis_bytes = (images.len() * n * n * std::mem::size_of::<u32>()) as u64;
    outcome.map(|()| PureBasis { braids, images, span })
}

/// `C = F_q[m0]`: span of `I, m0, m0², …` until a power adds nothing.
pub fn polynomial_algebra(m0: &Matrix) -> Subspace {
    let f = m0.field();
    let n = m0.rows();
    let mut c = Subspace::zero(f, n * n);
    let mut power = Matrix::identity(f, n);
    while c.insert(power.as_flat()).expect("ambient dimension n^2") {
        power = power.mul(m0).expect("square");
    }
    c
}

/// `stage2_find_c`: a random invertible element of `C ∩ γV`.
pub fn stage2_find_c(
    m0: &Matrix,
    gamma: &Matrix,
    v: &Subspace,
    budget: usize,
    rng: &mut LabRng,
    stats: &mut AttackStats,
) -> Result<Matrix, String> {
    let f = m0.field();
    let n = m0.rows();
    let c = polynomial_algebra(m0);
    stats.dim_c = Some(c.dim());
    let shifted: Vec<Vec<u32>> = v
        .basis()
        .iter()
        .map(|b| {
            let m = Matrix::unflatten_square(f, b).expect("flattened square");
            gamma.mul(&m).expect("square").as_flat().to_vec()
        })
        .collect();
    let gamma_v = Subspace::spanned_by(f, n * n, shifted.iter().map(Vec::as_slice)).expect("ambient dimension n^2");
    let meet = subspace_intersect(&c, &gamma_v).map_err(|e| e.to_string())?;
    stats.dim_intersection = Some(meet.dim());
    if meet.dim() == 0 {
        return Err("C and γV intersect trivially".into());
    }
    random_invertible_in(&meet, rng, budget).map_err(|e| e.to_string())
}

/// `attack_run` without telemetry.
pub fn attack_run(input: &AttackInput, config: &AttackConfig, rng: &mut LabRng) -> AttackResult {
    attack_run_timed(input, config, rng).0
}

pub fn attack_run_timed(
    input: &AttackInput,
    config: &AttackConfig,
    rng: &mut LabRng,
) -> (AttackResult, AttackTelemetry) {
    let started = Instant::now();
    let mut telemetry = AttackTelemetry::default();
    let mut stats = AttackStats::default();
    let mut clock = Instant::now();
    let mut lap = |stage: Stage, telemetry: &mut AttackTelemetry| {
        telemetry.stage_seconds.push((stage, clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };
    let outcome = (|| {
        let fail = |stage: Stage, reason: String| AttackOutcome::Failed { stage, reason };

        let basis = match precompute_pure_basis(input, config, rng, &mut stats) {
            Ok(b) => b,
            Err(PrecomputeError::Budget { samples }) => {
                lap(Stage::Precompute, &mut telemetry);
                return fail(
                    Stage::Precompute,
                    format!("budget: {samples} samples drawn without the span stabilizing"),
                );
            }
        };
        lap(Stage::Precompute, &mut telemetry);

        let g = &input.pub_a.perm;
        let found = find_word(
            input.alice_conjugates.perms(),
            g,
            config.stage1_max_states,
            config.stage1_restarts,
            config.stage1_prefix_len,
            rng,
        );
        lap(Stage::Stage1, &mut telemetry);
        let u = match found {
            SearchOutcome::Found { word, states } => {
                stats.stage1_states = states;
                word
            }
            SearchOutcome::NotInSubgroup { states } => {
                stats.stage1_states = states;
                return fail(Stage::Stage1, "not-in-subgroup: g is not generated by alice's conjugates".into());
            }
            SearchOutcome::Exhausted { states } => {
                stats.stage1_states = states;
                return fail(Stage::Stage1, "no-factorization: search budget exhausted".into());
            }
        };
        stats.stage1_word_len = Some(u.len());
        debug_assert_eq!(&input.alice_conjugates.index_word_permutation(&u), g);
        let a_tilde = input.emult_index_word(&input.identity(), &u).matrix;
        let inverse_u: Vec<i32> = u.iter().rev().map(|&l| -l).collect();
        let gamma_pair = input.emult_index_word(&input.pub_a, &inverse_u);
        assert!(gamma_pair.perm.is_identity(), "u has permutation g");
        let gamma = gamma_pair.matrix;

        let c_tilde = match stage2_find_c(&input.m0, &gamma, &basis.span, config.stage2_budget, rng, &mut stats) {
            Ok(c) => c,
            Err(reason) => {
                lap(Stage::Stage2, &mut telemetry);
                return fail(Stage::Stage2, reason);
            }
        };
        lap(Stage::Stage2, &mut telemetry);

        let c_inv = c_tilde.inverse().expect("c̃ is invertible");
        let alpha_prime = c_inv.mul(&gamma).expect("square");
        let generators: Vec<Vec<u32>> = basis.images.iter().map(|m| m.as_flat().to_vec()).collect();
        let Some(lambda) = solve_combination(&input.field, &generators, alpha_prime.as_flat()) else {
            lap(Stage::Stage3, &mut telemetry);
            return fail(
                Stage::Stage3,
                format!(
                    "span-miss: α′ is outside V (dim V = {}, dim C ∩ γV = {:?})",
                    basis.span.dim(),
                    stats.dim_intersection
                ),
            );
        };
        let f = &input.field;
        let h = &input.pub_b.perm;
        let twisted_start = EMultPair { matrix: Matrix::identity(f, input.n), perm: h.clone() };
        let mut beta_prime = Matrix::zero(f, input.n, input.n);
        for (coef, alpha) in lambda.iter().zip(&basis.braids) {
            if *coef == 0 {
                continue;
            }
            let twisted = input.emult_index_word(&twisted_start, alpha).matrix;
            beta_prime = beta_prime.add(&twisted.scale(*coef)).expect("square");
        }
        let start_matrix = c_tilde.mul(&input.pub_b.matrix).and_then(|m| m.mul(&beta_prime)).expect("square");
        let k = input.emult_index_word(&EMultPair { matrix: start_matrix, perm: h.clone() }, &u);
        lap(Stage::Stage3, &mut telemetry);
        AttackOutcome::Recovered(Box::new(Recovery { k, stage1_word: u, a_tilde, gamma, c_tilde, alpha_prime, lambda }))
    })();
    telemetry.total_seconds = started.elapsed().as_secs_f64();
    telemetry.peak_rss_kb = peak_rss_kb();
    (AttackResult { outcome, stats }, telemetry)
}
