//! `ae-lab`: command-line driver for the Algebraic Eraser lab.
//!
//! Exit status is 0 on success, 1 when a computation fails on its own terms
//! (the attack fails or is refused, secrets differ, a check fails) and 2 for
//! usage errors, including unreadable or malformed input files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ae_lab::aedh::{
    compute_public, compute_shared, default_poly_degree, default_z_len, gen_private, gen_system, PublicKey, Side,
    SystemParams, SystemSecrets, DEFAULT_BASE_WORD_LEN, DEFAULT_CONJUGATES, DEFAULT_PRIVATE_WORD_LEN,
};
use ae_lab::attack::{attack_run_timed, AttackConfig, AttackInput};
use ae_lab::defense::{
    defense_conjugates, gen_high_order_perms, gen_high_order_perms_reserving, gen_high_order_perms_with,
    order_statistics, prime_budget_with, PrimeSumReading,
};
use ae_lab::experiment::{run_experiment_timed, Distribution, ExperimentConfig, Scenario};
use ae_lab::ffield::Gf;
use ae_lab::invariants::{run_suite, SuiteConfig};
use ae_lab::rng::SeedTree;
use ae_lab::serial::{
    from_json, to_json, Artifact, AttackReport, DefenseReport, PrivateKeyFile, PublicKeyFile, SharedSecretFile,
};

#[derive(Parser)]
#[command(name = "ae-lab", version, about = "Algebraic Eraser key agreement, attack and defense lab")]
struct Cli {
    /// Root seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Spaces per JSON indentation level (0 for single-line output).
    #[arg(long, global = true, default_value_t = 2)]
    json_indent: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate system parameters (and optionally the generator's secrets).
    Setup(SetupArgs),
    /// Generate a private key for one side.
    Keygen(KeygenArgs),
    /// Compute the public key belonging to a private key.
    Pubkey(PubkeyArgs),
    /// Compute the shared secret from a private key and the other side's public key.
    Shared(SharedArgs),
    /// Recover the shared secret from public data only.
    Attack(AttackArgs),
    /// Build a high-order permutation set and report word-order statistics.
    Defend(DefendArgs),
    /// Run seeded trials of key agreement followed by the attack.
    Experiment(ExperimentArgs),
    /// Compare shared secrets, or run the representation invariant checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SetupArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    q: u64,
    /// Alice's conjugate count.
    #[arg(long, default_value_t = DEFAULT_CONJUGATES)]
    k: usize,
    /// Bob's conjugate count.
    #[arg(long, default_value_t = DEFAULT_CONJUGATES)]
    l: usize,
    #[arg(long, default_value_t = DEFAULT_BASE_WORD_LEN)]
    base_word_len: usize,
    /// Length of the conjugator `z` (default `2N`).
    #[arg(long)]
    z_len: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write `z` and the base words.
    #[arg(long)]
    secrets_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Alice,
    Bob,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Alice => Side::Alice,
            SideArg::Bob => Side::Bob,
        }
    }
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, value_enum)]
    side: SideArg,
    #[arg(long, default_value_t = DEFAULT_PRIVATE_WORD_LEN)]
    word_len: usize,
    /// Degree of the private polynomial in `m0` (default `N - 1`).
    #[arg(long)]
    degree: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PubkeyArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SharedArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    key: PathBuf,
    /// The other side's public key.
    #[arg(long)]
    their_public: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    FullPublic,
    WithheldPubB,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Scenario {
        match s {
            ScenarioArg::FullPublic => Scenario::FullPublic,
            ScenarioArg::WithheldPubB => Scenario::WithheldPubB,
        }
    }
}

#[derive(Args)]
struct AttackBudget {
    #[arg(long)]
    word_len_max: Option<usize>,
    #[arg(long)]
    order_cap: Option<usize>,
    #[arg(long)]
    stall_threshold: Option<usize>,
    #[arg(long)]
    sample_budget: Option<u64>,
    #[arg(long)]
    stage1_max_states: Option<usize>,
    #[arg(long)]
    stage2_budget: Option<usize>,
}

impl AttackBudget {
    fn apply(&self, base: AttackConfig) -> AttackConfig {
        AttackConfig {
            word_len_max: self.word_len_max.unwrap_or(base.word_len_max),
            order_cap: self.order_cap.or(base.order_cap),
            stall_threshold: self.stall_threshold.unwrap_or(base.stall_threshold),
            sample_budget: self.sample_budget.unwrap_or(base.sample_budget),
            stage1_max_states: self.stage1_max_states.unwrap_or(base.stage1_max_states),
            stage2_budget: self.stage2_budget.unwrap_or(base.stage2_budget),
            ..base
        }
    }
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    params: PathBuf,
    /// Alice's public key.
    #[arg(long)]
    pub_a: Option<PathBuf>,
    /// Bob's public key.
    #[arg(long)]
    pub_b: Option<PathBuf>,
    /// `withheld-pub-b` ignores `--pub-b`, modelling an attacker without it.
    #[arg(long, value_enum, default_value = "full-public")]
    scenario: ScenarioArg,
    #[command(flatten)]
    budget: AttackBudget,
    /// Leave wall-clock and memory figures out of the output.
    #[arg(long)]
    no_telemetry: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReadingArg {
    Inclusive,
    Literal,
}

#[derive(Args)]
struct DefendArgs {
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_CONJUGATES)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    word_len: usize,
    /// Words sampled for the order statistics (0 skips them).
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// How the prime-sum condition is read.
    #[arg(long, value_enum, default_value = "inclusive")]
    reading: ReadingArg,
    /// Rebuild this system's conjugates from the set; needs `--secrets`.
    #[arg(long, requires = "secrets", requires = "system_out")]
    emit_system: Option<PathBuf>,
    /// Secrets of the system given to `--emit-system`.
    #[arg(long)]
    secrets: Option<PathBuf>,
    #[arg(long)]
    system_out: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistributionArg {
    Standard,
    Defense,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    distribution: Option<DistributionArg>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    #[command(flatten)]
    budget: AttackBudget,
    /// Write wall-clock and memory figures here.
    #[arg(long)]
    telemetry: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Shared-secret files to compare (two or more).
    #[arg(long = "secret", num_args = 1..)]
    secrets: Vec<PathBuf>,
    /// Also validate this system-parameters file.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Randomized cases per action property.
    #[arg(long, default_value_t = 10_000)]
    cases: usize,
    /// Random t-value sets per strand count.
    #[arg(long, default_value_t = 100)]
    tvalue_sets: usize,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    Failed(String),
}

/// Errors that stop a command before it can produce a result.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type CmdResult = Result<Status, Usage>;

fn read<A: Artifact>(path: &Path) -> Result<A, Usage> {
    let text = fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    from_json(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Usage> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write<A: Artifact>(artifact: &A, output: Option<&Path>, indent: usize) -> Result<(), Usage> {
    emit(&to_json(artifact, indent), output)
}

fn setup(cli: &Cli, a: &SetupArgs) -> CmdResult {
    let field = Gf::for_order(a.q)?;
    let mut rng = SeedTree::root(cli.seed).child("setup").rng();
    let z_len = a.z_len.unwrap_or_else(|| default_z_len(a.n));
    let (params, secrets) = gen_system(a.n, &field, a.k, a.l, a.base_word_len, z_len, &mut rng)?;
    write(&params, a.output.as_deref(), cli.json_indent)?;
    if let Some(path) = &a.secrets_out {
        write(&secrets, Some(path), cli.json_indent)?;
    }
    Ok(Status::Ok)
}

fn keygen(cli: &Cli, a: &KeygenArgs) -> CmdResult {
    let params: SystemParams = read(&a.params)?;
    let side: Side = a.side.into();
    let mut rng = SeedTree::root(cli.seed).child("keygen").child(side.name()).rng();
    let degree = a.degree.unwrap_or_else(|| default_poly_degree(params.n));
    let key = gen_private(&params, side, a.word_len, degree, &mut rng)?;
    write(&PrivateKeyFile { field: params.field.clone(), key }, a.output.as_deref(), cli.json_indent)?;
    Ok(Status::Ok)
}

fn load_key(params: &SystemParams, path: &Path) -> Result<PrivateKeyFile, Usage> {
    let file: PrivateKeyFile = read(path)?;
    if file.field != params.field {
        return Err(Usage(format!("{}: key field differs from the system's", path.display())));
    }
    file.key.validate(params).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    Ok(file)
}

fn pubkey(cli: &Cli, a: &PubkeyArgs) -> CmdResult {
    let params: SystemParams = read(&a.params)?;
    let file = load_key(&params, &a.key)?;
    let key = compute_public(&params, &file.key)?;
    write(&PublicKeyFile { side: file.key.side, key }, a.output.as_deref(), cli.json_indent)?;
    Ok(Status::Ok)
}

fn shared(cli: &Cli, a: &SharedArgs) -> CmdResult {
    let params: SystemParams = read(&a.params)?;
    let file = load_key(&params, &a.key)?;
    let theirs: PublicKeyFile = read(&a.their_public)?;
    if theirs.side == file.key.side {
        return Err(Usage(format!(
            "{}: public key belongs to the same side as the private key",
            a.their_public.display()
        )));
    }
    if theirs.key.pair.n() != params.n || theirs.key.pair.matrix.field() != &params.field {
        return Err(Usage(format!("{}: public key does not match the system", a.their_public.display())));
    }
    let secret = compute_shared(&params, &file.key, &theirs.key)?;
    write(&SharedSecretFile { side: file.key.side, secret }, a.output.as_deref(), cli.json_indent)?;
    Ok(Status::Ok)
}

fn load_public(path: Option<&Path>, side: Side) -> Result<Option<PublicKey>, Usage> {
    let Some(path) = path else { return Ok(None) };
    let file: PublicKeyFile = read(path)?;
    if file.side != side {
        return Err(Usage(format!(
            "{}: expected {}'s public key, found {}'s",
            path.display(),
            side.name(),
            file.side.name()
        )));
    }
    Ok(Some(file.key))
}

fn attack(cli: &Cli, a: &AttackArgs) -> CmdResult {
    let params: SystemParams = read(&a.params)?;
    let pub_a = load_public(a.pub_a.as_deref(), Side::Alice)?;
    // the withheld scenario never opens Bob's file
    let pub_b = match Scenario::from(a.scenario) {
        Scenario::FullPublic => load_public(a.pub_b.as_deref(), Side::Bob)?,
        Scenario::WithheldPubB => None,
    };
    let input = match AttackInput::new(Some(&params), pub_a.as_ref(), pub_b.as_ref()) {
        Ok(input) => input,
        Err(e) => return Ok(Status::Failed(format!("attack refused: {e}"))),
    };
    let config = a.budget.apply(AttackConfig::default());
    let mut rng = SeedTree::root(cli.seed).child("attack").rng();
    let (result, telemetry) = attack_run_timed(&input, &config, &mut rng);
    let status = match &result.outcome {
        ae_lab::attack::AttackOutcome::Recovered(_) => Status::Ok,
        ae_lab::attack::AttackOutcome::Failed { stage, reason } => {
            Status::Failed(format!("attack failed at {}: {reason}", stage.name()))
        }
    };
    let report =
        AttackReport { field: params.field.clone(), result, telemetry: (!a.no_telemetry).then_some(telemetry) };
    write(&report, a.output.as_deref(), cli.json_indent)?;
    Ok(status)
}

fn defend(cli: &Cli, a: &DefendArgs) -> CmdResult {
    let seeds = SeedTree::root(cli.seed).child("defend");
    let mut rng = seeds.child("set").rng();
    let set = match (a.reading, &a.emit_system) {
        // a wrapped system keeps two strands free for the second user's band
        (ReadingArg::Inclusive, Some(_)) => gen_high_order_perms_reserving(a.n, 2, a.k, &mut rng)?,
        (ReadingArg::Inclusive, None) => gen_high_order_perms(a.n, a.k, &mut rng)?,
        (ReadingArg::Literal, _) => {
            gen_high_order_perms_with(prime_budget_with(a.n, PrimeSumReading::Literal)?, a.k, &mut rng)?
        }
    };
    for w in &set.warnings {
        eprintln!("warning: {w}");
    }
    let order_stats =
        (a.samples > 0).then(|| order_statistics(&set.rhos, a.word_len, a.samples, &mut seeds.child("stats").rng()));
    if let (Some(params_path), Some(secrets_path), Some(out)) = (&a.emit_system, &a.secrets, &a.system_out) {
        let params: SystemParams = read(params_path)?;
        let secrets: SystemSecrets = read(secrets_path)?;
        let (wrapped, _) = defense_conjugates(&params, &secrets, &set, &mut seeds.child("conjugates").rng())?;
        write(&wrapped, Some(out), cli.json_indent)?;
    }
    write(&DefenseReport { set, order_stats }, a.output.as_deref(), cli.json_indent)?;
    Ok(Status::Ok)
}

fn experiment(cli: &Cli, a: &ExperimentArgs) -> CmdResult {
    let mut config = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig { seed: cli.seed, ..ExperimentConfig::default() },
    };
    if cli.seed != 0 {
        config.seed = cli.seed;
    }
    config.n = a.n.unwrap_or(config.n);
    config.q = a.q.unwrap_or(config.q);
    config.k = a.k.unwrap_or(config.k);
    config.l = a.l.unwrap_or(config.l);
    config.trials = a.trials.unwrap_or(config.trials);
    if let Some(d) = a.distribution {
        config.distribution = match d {
            DistributionArg::Standard => Distribution::Standard,
            DistributionArg::Defense => Distribution::Defense,
        };
    }
    if let Some(s) = a.scenario {
        config.scenario = s.into();
    }
    config.attack = a.budget.apply(config.attack);
    let (report, telemetry) = run_experiment_timed(&config).map_err(|e| match e {
        ae_lab::experiment::ExperimentError::Config(m) => Usage(m),
        other => Usage(other.to_string()),
    })?;
    write(&report, a.output.as_deref(), cli.json_indent)?;
    if let Some(path) = &a.telemetry {
        let text = serde_json::to_string_pretty(&telemetry)? + "\n";
        emit(&text, Some(path))?;
    }
    Ok(Status::Ok)
}

fn verify(cli: &Cli, a: &VerifyArgs) -> CmdResult {
    if let Some(path) = &a.params {
        let _: SystemParams = read(path)?;
        eprintln!("{}: valid system parameters", path.display());
    }
    if !a.secrets.is_empty() {
        if a.secrets.len() < 2 {
            return Err(Usage("--secret needs at least two files to compare".into()));
        }
        let files = a.secrets.iter().map(|p| read::<SharedSecretFile>(p)).collect::<Result<Vec<_>, _>>()?;
        let first = &files[0].secret;
        return Ok(if files.iter().all(|f| &f.secret == first) {
            println!("shared secrets agree ({} files)", files.len());
            Status::Ok
        } else {
            Status::Failed("shared secrets differ".into())
        });
    }
    let config = SuiteConfig { action_cases: a.cases, tvalue_sets: a.tvalue_sets, ..SuiteConfig::default() };
    let reports = run_suite(&config, cli.seed);
    let mut failed = 0;
    for r in &reports {
        println!("{} {}: {} cases, {} failures", if r.passed() { "PASS" } else { "FAIL" }, r.name, r.cases, r.failures);
        failed += usize::from(!r.passed());
    }
    Ok(if failed == 0 { Status::Ok } else { Status::Failed(format!("{failed} invariant checks failed")) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Setup(a) => setup(&cli, a),
        Command::Keygen(a) => keygen(&cli, a),
        Command::Pubkey(a) => pubkey(&cli, a),
        Command::Shared(a) => shared(&cli, a),
        Command::Attack(a) => attack(&cli, a),
        Command::Defend(a) => defend(&cli, a),
        Command::Experiment(a) => experiment(&cli, a),
        Command::Verify(a) => verify(&cli, a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed(reason)) => {
            eprintln!("error: {reason}");
            ExitCode::from(1)
        }
        Err(Usage(reason)) => {
            eprintln!("error: {reason}");
            ExitCode::from(2)
        }
    }
}
