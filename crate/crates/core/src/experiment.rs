//! Seeded experiment driver.
//!
//! Trial `i` draws every random choice from `SeedTree::root(seed).indexed("trial", i)`,
//! so trials are independent of each other and of scheduling. Reports hold
//! only reproducible data; wall-clock and memory figures go to
//! [`ExperimentTelemetry`].

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aedh::{default_poly_degree, default_z_len, gen_system, run_exchange, AedhError, SystemParams};
use crate::attack::{
    attack_run_timed, peak_rss_kb, AttackConfig, AttackInput, AttackOutcome, AttackStats, AttackTelemetry,
};
use crate::defense::{defense_conjugates, gen_high_order_perms_reserving, DefenseError};
use crate::ffield::{FieldError, Gf};
use crate::rng::SeedTree;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "AE_LAB_THREADS";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Aedh(#[from] AedhError),
    #[error(transparent)]
    Defense(#[from] DefenseError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    #[default]
    Standard,
    /// Alice's conjugates project onto a high-order permutation set.
    Defense,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    #[default]
    FullPublic,
    /// The attacker never receives Bob's public key.
    WithheldPubB,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n: usize,
    pub q: u64,
    /// Alice's conjugate count.
    pub k: usize,
    /// Bob's conjugate count.
    pub l: usize,
    pub trials: usize,
    pub distribution: Distribution,
    pub scenario: Scenario,
    pub seed: u64,
    pub base_word_len: usize,
    /// `None` means `2N`.
    pub z_len: Option<usize>,
    pub private_word_len: usize,
    /// `None` means `N - 1`.
    pub poly_degree: Option<usize>,
    pub attack: AttackConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 8,
            q: 32,
            k: crate::aedh::DEFAULT_CONJUGATES,
            l: crate::aedh::DEFAULT_CONJUGATES,
            trials: 10,
            distribution: Distribution::Standard,
            scenario: Scenario::FullPublic,
            seed: 0,
            base_word_len: crate::aedh::DEFAULT_BASE_WORD_LEN,
            z_len: None,
            private_word_len: crate::aedh::DEFAULT_PRIVATE_WORD_LEN,
            poly_degree: None,
            attack: AttackConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::Config("trials must be at least 1".into()));
        }
        if self.n < 5 {
            return Err(ExperimentError::Config(format!("n = {} leaves no room for two bands", self.n)));
        }
        if self.k == 0 || self.l == 0 {
            return Err(ExperimentError::Config("conjugate counts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum TrialOutcome {
    /// The attack returned the honest shared secret.
    Recovered,
    /// The attack returned a secret that differs from the honest one.
    WrongSecret,
    Failed {
        stage: String,
        reason: String,
    },
    /// The attack input could not be assembled.
    Refused {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub agreement: bool,
    pub outcome: TrialOutcome,
    /// Order of Alice's conjugate permutations under the defense distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate_order: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<AttackStats>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub agreement_rate: f64,
    pub recovered: usize,
    pub wrong_secret: usize,
    pub refused: usize,
    pub failed_by_stage: BTreeMap<String, usize>,
    pub success_rate: f64,
}

/// Build facts that can change results; nothing machine-specific.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub crate_version: String,
    pub target_os: String,
    pub target_arch: String,
    pub debug_assertions: bool,
}

impl Fingerprint {
    pub fn current() -> Self {
        Fingerprint {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            target_os: std::env::consts::OS.to_string(),
            target_arch: std::env::consts::ARCH.to_string(),
            debug_assertions: cfg!(debug_assertions),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub environment: Fingerprint,
    pub trials: Vec<TrialRecord>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTelemetry {
    pub threads: usize,
    pub total_seconds: f64,
    /// Indexed by trial; `None` when no attack ran.
    pub trials: Vec<Option<AttackTelemetry>>,
    pub peak_rss_kb: Option<u64>,
}

/// Worker count: available parallelism, capped by `AE_LAB_THREADS`.
pub fn thread_count(trials: usize) -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&c| c > 0);
    cap.map_or(available, |c| c.min(available)).min(trials).max(1)
}

/// Builds the system for one trial under the configured distribution.
pub fn trial_system(
    config: &ExperimentConfig,
    seeds: &SeedTree,
) -> Result<(SystemParams, Option<u128>), ExperimentError> {
    let field = Gf::for_order(config.q)?;
    let n = config.n;
    let z_len = config.z_len.unwrap_or_else(|| default_z_len(n));
    let mut rng = seeds.child("system").rng();
    let (params, secrets) = gen_system(n, &field, config.k, config.l, config.base_word_len, z_len, &mut rng)?;
    match config.distribution {
        Distribution::Standard => Ok((params, None)),
        Distribution::Defense => {
            let mut rng = seeds.child("defense").rng();
            // two strands stay outside the cycles so Bob keeps at least one generator
            let set = gen_high_order_perms_reserving(n, 2, config.k, &mut rng)?;
            let (params, _) = defense_conjugates(&params, &secrets, &set, &mut rng)?;
            Ok((params, Some(set.budget.order_product)))
        }
    }
}

/// Runs one trial; domain failures become outcomes rather than errors.
pub fn run_trial(
    config: &ExperimentConfig,
    index: usize,
) -> Result<(TrialRecord, Option<AttackTelemetry>), ExperimentError> {
    let seeds = SeedTree::root(config.seed).indexed("trial", index as u64);
    let (params, order) = trial_system(config, &seeds)?;
    let degree = config.poly_degree.unwrap_or_else(|| default_poly_degree(config.n));
    let ex = run_exchange(
        &params,
        config.private_word_len,
        degree,
        &mut seeds.child("alice").rng(),
        &mut seeds.child("bob").rng(),
    )?;
    let bob_public = match config.scenario {
        Scenario::FullPublic => Some(&ex.bob_public),
        Scenario::WithheldPubB => None,
    };
    let mut record = TrialRecord {
        index,
        agreement: ex.agrees(),
        outcome: TrialOutcome::Recovered,
        conjugate_order: order.map(|o| o.to_string()),
        stats: None,
    };
    let input = match AttackInput::new(Some(&params), Some(&ex.alice_public), bob_public) {
        Ok(input) => input,
        Err(e) => {
            record.outcome = TrialOutcome::Refused { reason: e.to_string() };
            return Ok((record, None));
        }
    };
    let (result, telemetry) = attack_run_timed(&input, &config.attack, &mut seeds.child("attack").rng());
    record.outcome = match &result.outcome {
        AttackOutcome::Recovered(r) if r.k == ex.alice_secret.pair => TrialOutcome::Recovered,
        AttackOutcome::Recovered(_) => TrialOutcome::WrongSecret,
        AttackOutcome::Failed { stage, reason } => {
            TrialOutcome::Failed { stage: stage.name().to_string(), reason: reason.clone() }
        }
    };
    record.stats = Some(result.stats);
    Ok((record, Some(telemetry)))
}

pub fn summarize(records: &[TrialRecord]) -> Summary {
    let mut s = Summary { trials: records.len(), ..Summary::default() };
    let mut agreed = 0;
    for r in records {
        agreed += r.agreement as usize;
        match &r.outcome {
            TrialOutcome::Recovered => s.recovered += 1,
            TrialOutcome::WrongSecret => s.wrong_secret += 1,
            TrialOutcome::Refused { .. } => s.refused += 1,
            TrialOutcome::Failed { stage, .. } => *s.failed_by_stage.entry(stage.clone()).or_default() += 1,
        }
    }
    let total = records.len().max(1) as f64;
    s.agreement_rate = agreed as f64 / total;
    s.success_rate = s.recovered as f64 / total;
    s
}

/// `run_experiment` without telemetry.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    run_experiment_timed(config).map(|(report, _)| report)
}

pub fn run_experiment_timed(
    config: &ExperimentConfig,
) -> Result<(ExperimentReport, ExperimentTelemetry), ExperimentError> {
    config.validate()?;
    let started = Instant::now();
    let threads = thread_count(config.trials);
    let next = AtomicUsize::new(0);
    type Slot = Option<Result<(TrialRecord, Option<AttackTelemetry>), ExperimentError>>;
    let slots: Mutex<Vec<Slot>> = Mutex::new((0..config.trials).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= config.trials {
                    break;
                }
                let done = run_trial(config, i);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(done);
            });
        }
    });
    let mut trials = Vec::with_capacity(config.trials);
    let mut timings = Vec::with_capacity(config.trials);
    for slot in slots.into_inner().expect("workers joined") {
        let (record, telemetry) = slot.expect("every trial ran")?;
        trials.push(record);
        timings.push(telemetry);
    }
    let report = ExperimentReport {
        config: config.clone(),
        environment: Fingerprint::current(),
        summary: summarize(&trials),
        trials,
    };
    let telemetry = ExperimentTelemetry {
        threads,
        total_seconds: started.elapsed().as_secs_f64(),
        trials: timings,
        peak_rss_kb: peak_rss_kb(),
    };
    Ok((report, telemetry))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_standard_experiment() {
        let config = ExperimentConfig { trials: 4, seed: 3, ..ExperimentConfig::default() };
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.trials.len(), 4);
        assert!(report.trials.iter().enumerate().all(|(i, t)| t.index == i && t.agreement));
        assert_eq!(report.summary.agreement_rate, 1.0);
        assert_eq!(report.summary.wrong_secret, 0);
    }

    #[test]
    fn withheld_key_is_refused() {
        let config = ExperimentConfig { trials: 3, scenario: Scenario::WithheldPubB, ..ExperimentConfig::default() };
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.summary.refused, 3);
        for t in &report.trials {
            assert_eq!(t.outcome, TrialOutcome::Refused { reason: "missing public key (bob)".into() });
            assert!(t.stats.is_none());
        }
    }

    #[test]
    fn trials_do_not_depend_on_each_other() {
        let config = ExperimentConfig { trials: 3, seed: 9, ..ExperimentConfig::default() };
        let all = run_experiment(&config).unwrap();
        let (third, _) = run_trial(&config, 2).unwrap();
        assert_eq!(all.trials[2], third);
    }

    #[test]
    fn defense_trials_carry_the_order() {
        let config =
            ExperimentConfig { n: 12, trials: 1, distribution: Distribution::Defense, ..ExperimentConfig::default() };
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.trials[0].conjugate_order.as_deref(), Some("15"));
        assert!(report.trials[0].agreement);
    }

    #[test]
    fn rejects_zero_trials() {
        let config = ExperimentConfig { trials: 0, ..ExperimentConfig::default() };
        assert!(matches!(run_experiment(&config), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn summary_counts() {
        let rec = |outcome| TrialRecord { index: 0, agreement: true, outcome, conjugate_order: None, stats: None };
        let s = summarize(&[
            rec(TrialOutcome::Recovered),
            rec(TrialOutcome::WrongSecret),
            rec(TrialOutcome::Failed { stage: "stage2".into(), reason: String::new() }),
            rec(TrialOutcome::Recovered),
        ]);
        assert_eq!((s.recovered, s.wrong_secret, s.success_rate), (2, 1, 0.5));
        assert_eq!(s.failed_by_stage["stage2"], 1);
    }
}
