//! Canonical JSON artifacts.
//!
//! Every file is a UTF-8 JSON object with `version` and `kind` fields ahead
//! of the body. Field elements are lowercase hex (see [`Gf::to_hex`]),
//! matrices are arrays of rows, permutations are 1-based image lists and
//! braid words are signed 1-based generator indices. Artifacts that carry
//! field elements embed their [`FieldSpec`], so each decodes on its own.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aedh::{PrivateKey, PublicKey, SharedSecret, Side, SystemParams, SystemSecrets};
use crate::attack::{AttackOutcome, AttackResult, AttackStats, AttackTelemetry, Recovery, Stage};
use crate::braid::{BraidWord, ConjugateSet};
use crate::defense::{HighOrderPermSet, OrderStats};
use crate::emult::{EMultPair, TValues};
use crate::experiment::ExperimentReport;
use crate::ffield::{FieldSpec, Gf, Matrix};
use crate::perm::Permutation;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SerialError {
    #[error("malformed JSON at `{path}`: {reason}")]
    Json { path: String, reason: String },
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u64),
    #[error("expected an artifact of kind `{expected}`, found `{found}`")]
    Kind { expected: &'static str, found: String },
    #[error("field `{field}`: {reason}")]
    Field { field: String, reason: String },
}

fn field_err(field: impl Into<String>, reason: impl ToString) -> SerialError {
    SerialError::Field { field: field.into(), reason: reason.to_string() }
}

/// A type with a canonical JSON form.
pub trait Artifact: Sized {
    const KIND: &'static str;
    type Wire: Serialize + DeserializeOwned;
    fn to_wire(&self) -> Self::Wire;
    fn from_wire(wire: Self::Wire) -> Result<Self, SerialError>;
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    version: u32,
    kind: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

/// Serializes with `indent` spaces per level (`0` for one line), plus a
/// trailing newline.
pub fn to_json<A: Artifact>(artifact: &A, indent: usize) -> String {
    let wire = artifact.to_wire();
    let env = Envelope { version: FORMAT_VERSION, kind: A::KIND, body: &wire };
    let mut out = Vec::new();
    if indent == 0 {
        serde_json::to_writer(&mut out, &env).expect("in-memory write");
    } else {
        let pad = vec![b' '; indent];
        let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
        let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
        env.serialize(&mut ser).expect("in-memory write");
    }
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// Reads the `kind` field without decoding the body.
pub fn peek_kind(text: &str) -> Result<String, SerialError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| SerialError::Json { path: ".".into(), reason: e.to_string() })?;
    value
        .get("kind")
        .and_then(|k| k.as_str())
        .map(str::to_string)
        .ok_or_else(|| field_err("kind", "missing or not a string"))
}

pub fn from_json<A: Artifact>(text: &str) -> Result<A, SerialError> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| SerialError::Json { path: ".".into(), reason: e.to_string() })?;
    let obj = value.as_object_mut().ok_or_else(|| field_err(".", "top level is not an object"))?;
    let version = obj.remove("version").ok_or_else(|| field_err("version", "missing"))?;
    let version = version.as_u64().ok_or_else(|| field_err("version", "not an unsigned integer"))?;
    if version != FORMAT_VERSION as u64 {
        return Err(SerialError::Version(version));
    }
    let kind = obj.remove("kind").ok_or_else(|| field_err("kind", "missing"))?;
    let kind = kind.as_str().ok_or_else(|| field_err("kind", "not a string"))?;
    if kind != A::KIND {
        return Err(SerialError::Kind { expected: A::KIND, found: kind.to_string() });
    }
    let wire: A::Wire = serde_path_to_error::deserialize(value)
        .map_err(|e| SerialError::Json { path: e.path().to_string(), reason: e.inner().to_string() })?;
    A::from_wire(wire)
}

fn load_field(spec: &FieldSpec) -> Result<Gf, SerialError> {
    let spec = FieldSpec::new(spec.p, spec.m, spec.reduction.clone()).map_err(|e| field_err("field", e))?;
    Ok(Gf::new(spec))
}

pub fn matrix_to_hex(m: &Matrix) -> Vec<Vec<String>> {
    let f = m.field();
    (0..m.rows()).map(|r| m.row(r).iter().map(|&v| f.to_hex(v)).collect()).collect()
}

pub fn matrix_from_hex(field: &Gf, rows: &[Vec<String>], name: &str) -> Result<Matrix, SerialError> {
    let decoded = rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, s)| field.parse_hex(s).map_err(|e| field_err(format!("{name}[{r}][{c}]"), e)))
                .collect::<Result<Vec<u32>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(field, &decoded).map_err(|e| field_err(name, e))
}

fn square_from_hex(field: &Gf, rows: &[Vec<String>], n: usize, name: &str) -> Result<Matrix, SerialError> {
    let m = matrix_from_hex(field, rows, name)?;
    if m.rows() != n || m.cols() != n {
        return Err(field_err(name, format!("expected {n}x{n}, found {}x{}", m.rows(), m.cols())));
    }
    Ok(m)
}

fn words_from(n: usize, words: &[Vec<i32>], name: &str) -> Result<Vec<BraidWord>, SerialError> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| BraidWord::new(n, w.clone()).map_err(|e| field_err(format!("{name}[{i}]"), e)))
        .collect()
}

fn hex_list(field: &Gf, values: &[String], name: &str) -> Result<Vec<u32>, SerialError> {
    values
        .iter()
        .enumerate()
        .map(|(i, s)| field.parse_hex(s).map_err(|e| field_err(format!("{name}[{i}]"), e)))
        .collect()
}

#[derive(Serialize, Deserialize)]
pub struct SystemParamsWire {
    pub n: usize,
    pub field: FieldSpec,
    pub m0: Vec<Vec<String>>,
    pub tvalues: Vec<String>,
    pub alice_conjugates: Vec<Vec<i32>>,
    pub bob_conjugates: Vec<Vec<i32>>,
    pub z_length: usize,
    pub base_word_len: usize,
}

impl Artifact for SystemParams {
    const KIND: &'static str = "system-params";
    type Wire = SystemParamsWire;

    fn to_wire(&self) -> SystemParamsWire {
        let f = &self.field;
        let letters = |s: &ConjugateSet| s.words().iter().map(|w| w.letters().to_vec()).collect();
        SystemParamsWire {
            n: self.n,
            field: f.spec().clone(),
            m0: matrix_to_hex(&self.m0),
            tvalues: self.tvalues.values().iter().map(|&v| f.to_hex(v)).collect(),
            alice_conjugates: letters(&self.alice_conjugates),
            bob_conjugates: letters(&self.bob_conjugates),
            z_length: self.z_length,
            base_word_len: self.base_word_len,
        }
    }

    fn from_wire(w: SystemParamsWire) -> Result<Self, SerialError> {
        let field = load_field(&w.field)?;
        let n = w.n;
        let m0 = square_from_hex(&field, &w.m0, n, "m0")?;
        if w.tvalues.len() != n {
            return Err(field_err("tvalues", format!("expected {n} values, found {}", w.tvalues.len())));
        }
        let tvalues =
            TValues::new(&field, hex_list(&field, &w.tvalues, "tvalues")?).map_err(|e| field_err("tvalues", e))?;
        let alice_conjugates = ConjugateSet::new(n, words_from(n, &w.alice_conjugates, "alice_conjugates")?)
            .map_err(|e| field_err("alice_conjugates", e))?;
        let bob_conjugates = ConjugateSet::new(n, words_from(n, &w.bob_conjugates, "bob_conjugates")?)
            .map_err(|e| field_err("bob_conjugates", e))?;
        let params = SystemParams {
            n,
            field,
            m0,
            tvalues,
            alice_conjugates,
            bob_conjugates,
            z_length: w.z_length,
            base_word_len: w.base_word_len,
        };
        params.validate().map_err(|e| field_err(".", e))?;
        Ok(params)
    }
}

#[derive(Serialize, Deserialize)]
pub struct SystemSecretsWire {
    pub n: usize,
    pub z: Vec<i32>,
    pub alice_base: Vec<Vec<i32>>,
    pub bob_base: Vec<Vec<i32>>,
}

impl Artifact for SystemSecrets {
    const KIND: &'static str = "system-secrets";
    type Wire = SystemSecretsWire;

    fn to_wire(&self) -> SystemSecretsWire {
        let letters = |ws: &[BraidWord]| ws.iter().map(|w| w.letters().to_vec()).collect();
        SystemSecretsWire {
            n: self.z.n(),
            z: self.z.letters().to_vec(),
            alice_base: letters(&self.alice_base),
            bob_base: letters(&self.bob_base),
        }
    }

    fn from_wire(w: SystemSecretsWire) -> Result<Self, SerialError> {
        Ok(SystemSecrets {
            z: BraidWord::new(w.n, w.z).map_err(|e| field_err("z", e))?,
            alice_base: words_from(w.n, &w.alice_base, "alice_base")?,
            bob_base: words_from(w.n, &w.bob_base, "bob_base")?,
        })
    }
}

#[derive(Serialize, Deserialize)]
pub struct PrivateKeyWire {
    pub side: Side,
    pub n: usize,
    pub field: FieldSpec,
    pub poly_coeffs: Vec<String>,
    pub conjugate_word: Vec<i32>,
    pub braid: Vec<i32>,
}

impl PrivateKeyFile {
    fn field(&self) -> &Gf {
        &self.field
    }
}

/// A private key with the field its coefficients live in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateKeyFile {
    pub field: Gf,
    pub key: PrivateKey,
}

impl Artifact for PrivateKeyFile {
    const KIND: &'static str = "private-key";
    type Wire = PrivateKeyWire;

    fn to_wire(&self) -> PrivateKeyWire {
        let f = self.field();
        PrivateKeyWire {
            side: self.key.side,
            n: self.key.braid.n(),
            field: f.spec().clone(),
            poly_coeffs: self.key.poly_coeffs.iter().map(|&c| f.to_hex(c)).collect(),
            conjugate_word: self.key.conjugate_word.clone(),
            braid: self.key.braid.letters().to_vec(),
        }
    }

    fn from_wire(w: PrivateKeyWire) -> Result<Self, SerialError> {
        let field = load_field(&w.field)?;
        let poly_coeffs = hex_list(&field, &w.poly_coeffs, "poly_coeffs")?;
        if poly_coeffs.is_empty() {
            return Err(field_err("poly_coeffs", "empty polynomial"));
        }
        let braid = BraidWord::new(w.n, w.braid).map_err(|e| field_err("braid", e))?;
        let key = PrivateKey { side: w.side, poly_coeffs, braid, conjugate_word: w.conjugate_word };
        Ok(PrivateKeyFile { field, key })
    }
}

#[derive(Serialize, Deserialize)]
pub struct PairWire {
    pub matrix: Vec<Vec<String>>,
    pub perm: Permutation,
}

fn pair_to_wire(p: &EMultPair) -> PairWire {
    PairWire { matrix: matrix_to_hex(&p.matrix), perm: p.perm.clone() }
}

fn pair_from_wire(field: &Gf, w: &PairWire, name: &str) -> Result<EMultPair, SerialError> {
    let n = w.perm.n();
    let matrix = square_from_hex(field, &w.matrix, n, &format!("{name}.matrix"))?;
    EMultPair::new(matrix, w.perm.clone()).map_err(|e| field_err(name, e))
}

#[derive(Serialize, Deserialize)]
pub struct SidedPairWire {
    pub side: Side,
    pub field: FieldSpec,
    #[serde(flatten)]
    pub pair: PairWire,
}

/// A public key labelled with its owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKeyFile {
    pub side: Side,
    pub key: PublicKey,
}

impl Artifact for PublicKeyFile {
    const KIND: &'static str = "public-key";
    type Wire = SidedPairWire;

    fn to_wire(&self) -> SidedPairWire {
        SidedPairWire {
            side: self.side,
            field: self.key.pair.matrix.field().spec().clone(),
            pair: pair_to_wire(&self.key.pair),
        }
    }

    fn from_wire(w: SidedPairWire) -> Result<Self, SerialError> {
        let field = load_field(&w.field)?;
        Ok(PublicKeyFile { side: w.side, key: PublicKey { pair: pair_from_wire(&field, &w.pair, "pair")? } })
    }
}

/// A shared secret labelled with the party that computed it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedSecretFile {
    pub side: Side,
    pub secret: SharedSecret,
}

impl Artifact for SharedSecretFile {
    const KIND: &'static str = "shared-secret";
    type Wire = SidedPairWire;

    fn to_wire(&self) -> SidedPairWire {
        SidedPairWire {
            side: self.side,
            field: self.secret.pair.matrix.field().spec().clone(),
            pair: pair_to_wire(&self.secret.pair),
        }
    }

    fn from_wire(w: SidedPairWire) -> Result<Self, SerialError> {
        let field = load_field(&w.field)?;
        Ok(SharedSecretFile { side: w.side, secret: SharedSecret { pair: pair_from_wire(&field, &w.pair, "pair")? } })
    }
}

/// Attack output: the deterministic result plus optional measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackReport {
    pub field: Gf,
    pub result: AttackResult,
    pub telemetry: Option<AttackTelemetry>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum OutcomeWire {
    Recovered {
        k: PairWire,
        stage1_word: Vec<i32>,
        a_tilde: Vec<Vec<String>>,
        gamma: Vec<Vec<String>>,
        c_tilde: Vec<Vec<String>>,
        alpha_prime: Vec<Vec<String>>,
        lambda: Vec<String>,
    },
    Failed {
        stage: Stage,
        reason: String,
    },
}

#[derive(Serialize, Deserialize)]
pub struct AttackReportWire {
    pub field: FieldSpec,
    pub outcome: OutcomeWire,
    pub stats: AttackStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub telemetry: Option<AttackTelemetry>,
}

pub fn outcome_to_wire(outcome: &AttackOutcome) -> OutcomeWire {
    match outcome {
        AttackOutcome::Recovered(r) => {
            let f = r.k.matrix.field();
            OutcomeWire::Recovered {
                k: pair_to_wire(&r.k),
                stage1_word: r.stage1_word.clone(),
                a_tilde: matrix_to_hex(&r.a_tilde),
                gamma: matrix_to_hex(&r.gamma),
                c_tilde: matrix_to_hex(&r.c_tilde),
                alpha_prime: matrix_to_hex(&r.alpha_prime),
                lambda: r.lambda.iter().map(|&v| f.to_hex(v)).collect(),
            }
        }
        AttackOutcome::Failed { stage, reason } => OutcomeWire::Failed { stage: *stage, reason: reason.clone() },
    }
}

impl Artifact for AttackReport {
    const KIND: &'static str = "attack-result";
    type Wire = AttackReportWire;

    fn to_wire(&self) -> AttackReportWire {
        AttackReportWire {
            field: self.field.spec().clone(),
            outcome: outcome_to_wire(&self.result.outcome),
            stats: self.result.stats.clone(),
            telemetry: self.telemetry.clone(),
        }
    }

    fn from_wire(w: AttackReportWire) -> Result<Self, SerialError> {
        let field = load_field(&w.field)?;
        let outcome = match w.outcome {
            OutcomeWire::Failed { stage, reason } => AttackOutcome::Failed { stage, reason },
            OutcomeWire::Recovered { k, stage1_word, a_tilde, gamma, c_tilde, alpha_prime, lambda } => {
                let k = pair_from_wire(&field, &k, "outcome.k")?;
                let n = k.n();
                AttackOutcome::Recovered(Box::new(Recovery {
                    k,
                    stage1_word,
                    a_tilde: square_from_hex(&field, &a_tilde, n, "outcome.a_tilde")?,
                    gamma: square_from_hex(&field, &gamma, n, "outcome.gamma")?,
                    c_tilde: square_from_hex(&field, &c_tilde, n, "outcome.c_tilde")?,
                    alpha_prime: square_from_hex(&field, &alpha_prime, n, "outcome.alpha_prime")?,
                    lambda: hex_list(&field, &lambda, "outcome.lambda")?,
                }))
            }
        };
        Ok(AttackReport { field, result: AttackResult { outcome, stats: w.stats }, telemetry: w.telemetry })
    }
}

/// A defense permutation set with its optional order statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefenseReport {
    pub set: HighOrderPermSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_stats: Option<OrderStats>,
}

impl Artifact for DefenseReport {
    const KIND: &'static str = "defense-set";
    type Wire = DefenseReport;

    fn to_wire(&self) -> DefenseReport {
        self.clone()
    }

    fn from_wire(w: DefenseReport) -> Result<Self, SerialError> {
        w.set.validate().map_err(|e| field_err("set", e))?;
        Ok(w)
    }
}

impl Artifact for ExperimentReport {
    const KIND: &'static str = "experiment-report";
    type Wire = ExperimentReport;

    fn to_wire(&self) -> ExperimentReport {
        self.clone()
    }

    fn from_wire(w: ExperimentReport) -> Result<Self, SerialError> {
        Ok(w)
    }
}
