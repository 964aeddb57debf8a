//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so criteria execute in order and each
//! prints exactly one line. Every threshold is a named constant below; the
//! process exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use ae_lab::aedh::{default_poly_degree, default_z_len, gen_system, poly_in_m0, run_exchange, DEFAULT_BASE_WORD_LEN};
use ae_lab::attack::{precompute_pure_basis, AttackConfig, AttackInput, AttackStats};
use ae_lab::braid::braid_preimage;
use ae_lab::defense::{defense_conjugates, gen_high_order_perms, gen_high_order_perms_reserving, order_statistics};
use ae_lab::experiment::{
    run_experiment, run_experiment_timed, Distribution, ExperimentConfig, Scenario, TrialOutcome,
};
use ae_lab::ffield::{subspace_intersect, Gf, Matrix, Subspace};
use ae_lab::invariants::{run_suite, SuiteConfig};
use ae_lab::perm::Permutation;
use ae_lab::rng::{LabRng, SeedTree};
use ae_lab::serial::to_json;
use ae_lab_validation::{all_images, gf2_members, gf2_subspace, gf2_subspaces, power_sum};

// 1: agreement
const AGREEMENT_CONFIGS: [(usize, u64); 3] = [(8, 32), (10, 256), (16, 256)];
const AGREEMENT_EXCHANGES: usize = 1000;
const AGREEMENT_MAX_SECONDS: f64 = 120.0;
// 2: representation soundness
const RELATION_MAX_N: usize = 8;
const RELATION_Q: u64 = 32;
const RELATION_TVALUE_SETS: usize = 100;
const ACTION_CASES: usize = 10_000;
// 3: attack success
const ATTACK_TRIALS: usize = 50;
const ATTACK_MIN_SUCCESS: f64 = 0.90;
const ATTACK_MAX_TRIAL_SECONDS: f64 = 60.0;
const LONG_RUN: (usize, u64) = (16, 256);
// 4: defense
const DEFENSE_N: usize = 32;
const DEFENSE_K: usize = 4;
const DEFENSE_WORD_LEN: usize = 10;
const DEFENSE_SAMPLES: u64 = 10_000;
const DEFENSE_MIN_ABOVE_N: f64 = 0.99;
const DEFENSE_TRIALS: usize = 20;
const DEFENSE_BASE_LEN: usize = DEFAULT_BASE_WORD_LEN;
const DEFENSE_SAMPLE_BUDGET: u64 = 100_000;
const DEFENSE_MIN_EXHAUSTED: f64 = 0.95;
const RHO_ORDERS: [(usize, u128); 3] = [(8, 15), (16, 105), (32, 1155)];
// 5: scenario gate
const SCENARIO_TRIALS: usize = 20;
const SCENARIO_ERROR: &str = "missing public key";
// 6: oracles
const INTERSECT_MAX_DIM: usize = 6;
const POLY_CASES: usize = 100;
const PREIMAGE_N: usize = 5;
// 7: determinism
const DETERMINISM_TRIALS: usize = 6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn criterion_1() -> Verdict {
    let started = Instant::now();
    let mut parts = Vec::new();
    let mut all = true;
    for (n, q) in AGREEMENT_CONFIGS {
        let f = Gf::for_order(q).unwrap();
        let seeds = SeedTree::root(1).child(&format!("agreement-{n}-{q}"));
        let mut agreed = 0;
        for i in 0..AGREEMENT_EXCHANGES as u64 {
            let s = seeds.indexed("exchange", i);
            let (params, _) =
                gen_system(n, &f, 4, 4, DEFAULT_BASE_WORD_LEN, default_z_len(n), &mut s.child("system").rng()).unwrap();
            let ex = run_exchange(
                &params,
                8,
                default_poly_degree(n),
                &mut s.child("alice").rng(),
                &mut s.child("bob").rng(),
            )
            .unwrap();
            agreed += usize::from(ex.agrees());
        }
        all &= agreed == AGREEMENT_EXCHANGES;
        parts.push(format!("N={n},q={q}: {agreed}/{AGREEMENT_EXCHANGES}"));
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        all && secs <= AGREEMENT_MAX_SECONDS,
        format!("{} agree in {secs:.1}s (need 100% and <= {AGREEMENT_MAX_SECONDS}s)", parts.join(", ")),
    )
}

fn criterion_2() -> Verdict {
    let config = SuiteConfig {
        q: RELATION_Q,
        max_n: RELATION_MAX_N,
        tvalue_sets: RELATION_TVALUE_SETS,
        action_cases: ACTION_CASES,
        ..SuiteConfig::default()
    };
    let reports = run_suite(&config, 2);
    let failures: u64 = reports.iter().map(|r| r.failures).sum();
    let parts: Vec<String> =
        reports.iter().map(|r| format!("{}: {}/{} ok", r.name, r.cases - r.failures, r.cases)).collect();
    verdict(failures == 0, format!("{} (zero failures tolerated)", parts.join("; ")))
}

fn criterion_3() -> Verdict {
    let config = ExperimentConfig { n: 8, q: 32, trials: ATTACK_TRIALS, seed: 3, ..ExperimentConfig::default() };
    let (report, telemetry) = run_experiment_timed(&config).unwrap();
    let slowest = telemetry.trials.iter().flatten().map(|t| t.total_seconds).fold(0.0, f64::max);
    let s = &report.summary;
    let main_pass = s.success_rate >= ATTACK_MIN_SUCCESS && slowest <= ATTACK_MAX_TRIAL_SECONDS;

    // optional long-run profile: must complete with memory telemetry; success not required
    let (n, q) = LONG_RUN;
    let long = ExperimentConfig { n, q, trials: 1, seed: 3, ..ExperimentConfig::default() };
    let (long_report, long_tel) = run_experiment_timed(&long).unwrap();
    let long_outcome = match &long_report.trials[0].outcome {
        TrialOutcome::Recovered => "recovered".to_string(),
        TrialOutcome::WrongSecret => "wrong secret".to_string(),
        TrialOutcome::Failed { stage, .. } => format!("failed at {stage}"),
        TrialOutcome::Refused { reason } => format!("refused: {reason}"),
    };
    let dim_v = long_report.trials[0].stats.as_ref().map_or(0, |st| st.dim_v);
    let rss = long_tel.peak_rss_kb;
    verdict(
        main_pass && rss.is_some(),
        format!(
            "N=8,q=32: {}/{} recovered ({:.0}%, need >= {:.0}%), wrong={}, failed={:?}, slowest trial {slowest:.2}s (limit {ATTACK_MAX_TRIAL_SECONDS}s); \
             long run N={n},q={q}: {long_outcome}, dim V={dim_v}, {:.1}s, peak RSS {} kB",
            s.recovered,
            s.trials,
            100.0 * s.success_rate,
            100.0 * ATTACK_MIN_SUCCESS,
            s.wrong_secret,
            s.failed_by_stage,
            long_tel.total_seconds,
            rss.map_or("unavailable".into(), |r| r.to_string()),
        ),
    )
}

fn criterion_4() -> Verdict {
    // orders of the generated sets
    let mut rng = LabRng::from_seed(4);
    let mut orders_ok = true;
    let mut orders = Vec::new();
    for (n, want) in RHO_ORDERS {
        let set = gen_high_order_perms(n, DEFENSE_K, &mut rng).unwrap();
        let got: BTreeSet<u128> = set.rhos.iter().map(Permutation::order).collect();
        orders_ok &= got == BTreeSet::from([want]);
        orders.push(format!("N={n}: {got:?}"));
    }

    // (a) word orders over the set used for the defense systems
    let set = gen_high_order_perms_reserving(DEFENSE_N, 2, DEFENSE_K, &mut rng).unwrap();
    let stats = order_statistics(&set.rhos, DEFENSE_WORD_LEN, DEFENSE_SAMPLES, &mut rng);
    let a_pass = stats.fraction_above_n >= DEFENSE_MIN_ABOVE_N;

    // (b) precomputation on defense-distribution systems
    let f = Gf::for_order(32).unwrap();
    let config = AttackConfig { sample_budget: DEFENSE_SAMPLE_BUDGET, ..AttackConfig::default() };
    let mut exhausted = 0;
    let mut low_order = 0u64;
    let mut drawn = 0u64;
    for trial in 0..DEFENSE_TRIALS as u64 {
        let s = SeedTree::root(4).indexed("defense-trial", trial);
        let mut r = s.child("system").rng();
        let (params, secrets) =
            gen_system(DEFENSE_N, &f, DEFENSE_K, 4, DEFENSE_BASE_LEN, default_z_len(DEFENSE_N), &mut r).unwrap();
        let set = gen_high_order_perms_reserving(DEFENSE_N, 2, DEFENSE_K, &mut r).unwrap();
        let (params, _) = defense_conjugates(&params, &secrets, &set, &mut r).unwrap();
        let ex = run_exchange(
            &params,
            8,
            default_poly_degree(DEFENSE_N),
            &mut s.child("alice").rng(),
            &mut s.child("bob").rng(),
        )
        .unwrap();
        let input = AttackInput::new(Some(&params), Some(&ex.alice_public), Some(&ex.bob_public)).unwrap();
        let mut st = AttackStats::default();
        if precompute_pure_basis(&input, &config, &mut s.child("attack").rng(), &mut st).is_err() {
            exhausted += 1;
        }
        low_order += st.low_order_samples;
        drawn += st.samples;
    }
    let rate = exhausted as f64 / DEFENSE_TRIALS as f64;
    let b_pass = rate >= DEFENSE_MIN_EXHAUSTED;
    verdict(
        orders_ok && a_pass && b_pass,
        format!(
            "rho orders {} ({}); (a) {:.2}% of {DEFENSE_SAMPLES} words of length <= {DEFENSE_WORD_LEN} have order > {DEFENSE_N} (need >= {:.0}%) [{}]; \
             (b) precompute exhausted {DEFENSE_SAMPLE_BUDGET} samples in {exhausted}/{DEFENSE_TRIALS} trials (need >= {:.0}%), \
             {low_order} of {drawn} samples had order <= {DEFENSE_N} [{}]",
            orders.join(", "),
            if orders_ok { "ok" } else { "MISMATCH" },
            100.0 * stats.fraction_above_n,
            100.0 * DEFENSE_MIN_ABOVE_N,
            if a_pass { "ok" } else { "FAIL" },
            100.0 * DEFENSE_MIN_EXHAUSTED,
            if b_pass { "ok" } else { "FAIL" },
        ),
    )
}

fn criterion_5() -> Verdict {
    let config = ExperimentConfig {
        trials: SCENARIO_TRIALS,
        scenario: Scenario::WithheldPubB,
        seed: 5,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&config).unwrap();
    let gated = report
        .trials
        .iter()
        .filter(|t| {
            matches!(&t.outcome, TrialOutcome::Refused { reason } if reason.contains(SCENARIO_ERROR))
                && t.stats.is_none()
        })
        .count();
    verdict(
        gated == SCENARIO_TRIALS,
        format!("{gated}/{SCENARIO_TRIALS} runs refused before any stage with \"{SCENARIO_ERROR}\" (need 100%)"),
    )
}

fn criterion_6() -> Verdict {
    let f = Gf::for_order(2).unwrap();
    let mut pairs = 0u64;
    let mut mismatches = 0u64;
    for d in 1..=INTERSECT_MAX_DIM {
        let masks = gf2_subspaces(d);
        let spaces: Vec<Subspace> = masks.iter().map(|&m| gf2_subspace(&f, d, m)).collect();
        for (mu, u) in masks.iter().zip(&spaces) {
            for (mw, w) in masks.iter().zip(&spaces) {
                pairs += 1;
                mismatches += u64::from(gf2_members(&subspace_intersect(u, w).unwrap()) != mu & mw);
            }
        }
    }

    let mut rng = LabRng::from_seed(6);
    let mut poly_bad = 0;
    for case in 0..POLY_CASES {
        let f = Gf::for_order([32u64, 256, 5, 7][case % 4]).unwrap();
        let n = rng.range_inclusive(1, 8);
        let m0 = Matrix::random(&f, n, n, &mut rng);
        let coeffs: Vec<u32> = (0..rng.range_inclusive(1, 10)).map(|_| f.random(&mut rng)).collect();
        poly_bad += usize::from(poly_in_m0(&coeffs, &m0).unwrap() != power_sum(&f, &coeffs, &m0));
    }

    // every permutation of S_5 round-trips through its positive preimage
    let perms = all_images(PREIMAGE_N);
    let preimage_bad = perms
        .iter()
        .filter(|images| {
            let p = Permutation::from_images(images).unwrap();
            let w = braid_preimage(&p);
            w.permutation() != p || w.letters().iter().any(|&l| l < 0)
        })
        .count();

    verdict(
        mismatches == 0 && poly_bad == 0 && preimage_bad == 0 && perms.len() == 120,
        format!(
            "intersection vs enumeration: {mismatches} mismatches over {pairs} subspace pairs (dim <= {INTERSECT_MAX_DIM}, GF(2)); \
             poly_in_m0 vs power sum: {poly_bad}/{POLY_CASES} mismatches; preimage round trip: {preimage_bad}/{} mismatches on S_{PREIMAGE_N}",
            perms.len()
        ),
    )
}

fn criterion_7() -> Verdict {
    let configs = [
        ExperimentConfig { trials: DETERMINISM_TRIALS, seed: 7, ..ExperimentConfig::default() },
        ExperimentConfig {
            n: 12,
            trials: 2,
            seed: 7,
            distribution: Distribution::Defense,
            ..ExperimentConfig::default()
        },
    ];
    let mut identical = 0;
    let mut bytes = Vec::new();
    for config in &configs {
        let a = to_json(&run_experiment(config).unwrap(), 2);
        let b = to_json(&run_experiment(config).unwrap(), 2);
        identical += usize::from(a == b);
        bytes.push(a.len());
    }
    verdict(
        identical == configs.len(),
        format!("{identical}/{} report pairs byte-identical (sizes {bytes:?} bytes)", configs.len()),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1", "shared-secret agreement", criterion_1),
        ("2", "representation soundness", criterion_2),
        ("3", "attack success at desk scale", criterion_3),
        ("4", "defense efficacy", criterion_4),
        ("5", "scenario gate", criterion_5),
        ("6", "oracle equivalences", criterion_6),
        ("7", "determinism", criterion_7),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let started = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += usize::from(!v.pass);
        println!(
            "{} criterion {id} ({name}) [{:.1}s]: {}",
            if v.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
