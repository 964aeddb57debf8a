//! Algebraic Eraser Diffie–Hellman: system data, keys and the shared secret.
//!
//! Alice's and Bob's base braids live in two generator bands that commute
//! letter by letter, and both sets are conjugated by one hidden braid `z`.
//! Private matrices are polynomials in the public seed matrix `m0`, so they
//! commute with each other; together these make both parties' E-multiplication
//! chains end at the same pair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{commuting_bands, conjugate, random_word, BraidError, BraidWord, ConjugateSet};
use crate::emult::{emult, EMultPair, EmultError, TValues};
use crate::ffield::{FieldError, Gf, Matrix};
use crate::perm::Permutation;
use crate::rng::LabRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AedhError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Braid(#[from] BraidError),
    #[error(transparent)]
    Emult(#[from] EmultError),
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),
    #[error("invalid key: {0}")]
    InvalidKey(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Alice => "alice",
            Side::Bob => "bob",
        }
    }
}

/// Default number of conjugates per user.
pub const DEFAULT_CONJUGATES: usize = 4;
/// Default length of the base words `a_i`, `b_j` before conjugation.
pub const DEFAULT_BASE_WORD_LEN: usize = 10;
/// Default number of signed conjugate indices in a private braid.
pub const DEFAULT_PRIVATE_WORD_LEN: usize = 8;

/// Default `z` length: `2N` letters over all generators.
pub fn default_z_len(n: usize) -> usize {
    2 * n
}

/// Default private polynomial degree: `N - 1`.
pub fn default_poly_degree(n: usize) -> usize {
    n - 1
}

/// Public system data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub n: usize,
    pub field: Gf,
    pub m0: Matrix,
    pub tvalues: TValues,
    pub alice_conjugates: ConjugateSet,
    pub bob_conjugates: ConjugateSet,
    pub z_length: usize,
    pub base_word_len: usize,
}

/// Generation-time material that never appears in public artifacts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSecrets {
    pub z: BraidWord,
    pub alice_base: Vec<BraidWord>,
    pub bob_base: Vec<BraidWord>,
}

impl SystemParams {
    pub fn conjugates(&self, side: Side) -> &ConjugateSet {
        match side {
            Side::Alice => &self.alice_conjugates,
            Side::Bob => &self.bob_conjugates,
        }
    }

    /// Checks every structural invariant, including that each published
    /// conjugate of Alice commutes with each of Bob's under E-multiplication.
    pub fn validate(&self) -> Result<(), AedhError> {
        let n = self.n;
        if self.m0.rows() != n || !self.m0.is_square() || self.tvalues.n() != n {
            return Err(AedhError::InvalidParams(format!("sizes disagree with n = {n}")));
        }
        if self.m0.field() != &self.field || self.tvalues.field() != &self.field {
            return Err(FieldError::FieldMismatch.into());
        }
        if !self.m0.is_invertible() {
            return Err(AedhError::InvalidParams("m0 is singular".into()));
        }
        if self.alice_conjugates.n() != n || self.bob_conjugates.n() != n {
            return Err(AedhError::InvalidParams("conjugate strand count differs from n".into()));
        }
        let id = EMultPair::identity(&self.field, n);
        for (i, a) in self.alice_conjugates.words().iter().enumerate() {
            for (j, b) in self.bob_conjugates.words().iter().enumerate() {
                let ab = emult(&emult(&id, a, &self.tvalues)?, b, &self.tvalues)?;
                let ba = emult(&emult(&id, b, &self.tvalues)?, a, &self.tvalues)?;
                if ab != ba {
                    return Err(AedhError::InvalidParams(format!(
                        "alice conjugate {} and bob conjugate {} do not commute",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Conjugates `z w z^{-1}` of each base word.
pub(crate) fn conjugate_all(n: usize, z: &BraidWord, base: &[BraidWord]) -> Result<ConjugateSet, AedhError> {
    let words = base.iter().map(|a| conjugate(z, a)).collect::<Result<Vec<_>, _>>()?;
    Ok(ConjugateSet::new(n, words)?)
}

/// `gen_system`: random `m0`, t-values, commuting base words and a shared `z`.
pub fn gen_system(
    n: usize,
    field: &Gf,
    k: usize,
    l: usize,
    base_word_len: usize,
    z_len: usize,
    rng: &mut LabRng,
) -> Result<(SystemParams, SystemSecrets), AedhError> {
    if k == 0 || l == 0 {
        return Err(AedhError::InvalidParams("each user needs at least one conjugate".into()));
    }
    let (lower, upper) = commuting_bands(n)?;
    let lower: Vec<usize> = lower.collect();
    let upper: Vec<usize> = upper.collect();
    let all: Vec<usize> = (1..n).collect();

    let m0 = Matrix::random_invertible(field, n, rng);
    let tvalues = TValues::random(field, n, rng);
    let alice_base = (0..k).map(|_| random_word(n, base_word_len, &lower, rng)).collect::<Result<Vec<_>, _>>()?;
    let bob_base = (0..l).map(|_| random_word(n, base_word_len, &upper, rng)).collect::<Result<Vec<_>, _>>()?;
    let z = random_word(n, z_len, &all, rng)?;

    let params = SystemParams {
        n,
        field: field.clone(),
        m0,
        tvalues,
        alice_conjugates: conjugate_all(n, &z, &alice_base)?,
        bob_conjugates: conjugate_all(n, &z, &bob_base)?,
        z_length: z_len,
        base_word_len,
    };
    params.validate()?;
    Ok((params, SystemSecrets { z, alice_base, bob_base }))
}

/// `Σ coeffs[i] · m0^i` by Horner's rule.
pub fn poly_in_m0(coeffs: &[u32], m0: &Matrix) -> Result<Matrix, AedhError> {
    let f = m0.field();
    let n = m0.rows();
    let (last, rest) = coeffs.split_last().ok_or_else(|| AedhError::InvalidKey("empty coefficient list".into()))?;
    let mut acc = Matrix::scalar(f, n, *last);
    for &c in rest.iter().rev() {
        acc = acc.mul(m0)?.add(&Matrix::scalar(f, n, c))?;
    }
    Ok(acc)
}

/// A user's private key `(Σ f_i m0^i, w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateKey {
    pub side: Side,
    pub poly_coeffs: Vec<u32>,
    /// Expansion of `conjugate_word` over Artin letters, freely reduced.
    pub braid: BraidWord,
    /// Signed 1-based indices into the owner's conjugate set.
    pub conjugate_word: Vec<i32>,
}

impl PrivateKey {
    pub fn matrix(&self, params: &SystemParams) -> Result<Matrix, AedhError> {
        poly_in_m0(&self.poly_coeffs, &params.m0)
    }

    /// Re-derives the braid from the index word and the invertible matrix.
    pub fn validate(&self, params: &SystemParams) -> Result<(), AedhError> {
        let expanded = params.conjugates(self.side).expand(&self.conjugate_word)?;
        if expanded != self.braid {
            return Err(AedhError::InvalidKey("braid does not match its conjugate word".into()));
        }
        if !self.matrix(params)?.is_invertible() {
            return Err(AedhError::InvalidKey("private matrix is singular".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub pair: EMultPair,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedSecret {
    pub pair: EMultPair,
}

/// `gen_private`: rejection-samples the polynomial until it is invertible and
/// draws `word_len` signed conjugate indices.
pub fn gen_private(
    params: &SystemParams,
    side: Side,
    word_len: usize,
    poly_deg: usize,
    rng: &mut LabRng,
) -> Result<PrivateKey, AedhError> {
    if word_len == 0 {
        return Err(AedhError::InvalidKey("private word length must be positive".into()));
    }
    let f = &params.field;
    let poly_coeffs = loop {
        let coeffs: Vec<u32> = (0..=poly_deg).map(|_| f.random(rng)).collect();
        if poly_in_m0(&coeffs, &params.m0)?.is_invertible() {
            break coeffs;
        }
    };
    let set = params.conjugates(side);
    let conjugate_word: Vec<i32> = (0..word_len)
        .map(|_| {
            let j = 1 + rng.below_usize(set.len()) as i32;
            if rng.coin() {
                j
            } else {
                -j
            }
        })
        .collect();
    let braid = set.expand(&conjugate_word)?;
    Ok(PrivateKey { side, poly_coeffs, braid, conjugate_word })
}

/// `(m, 1) ⋆ (CB(w), σ_w)`.
pub fn compute_public(params: &SystemParams, key: &PrivateKey) -> Result<PublicKey, AedhError> {
    let start = EMultPair { matrix: key.matrix(params)?, perm: Permutation::identity(params.n) };
    Ok(PublicKey { pair: emult(&start, &key.braid, &params.tvalues)? })
}

/// `(m_mine · their_matrix, their_perm) ⋆ (CB(w_mine), σ_{w_mine})`.
pub fn compute_shared(params: &SystemParams, mine: &PrivateKey, theirs: &PublicKey) -> Result<SharedSecret, AedhError> {
    let start = EMultPair { matrix: mine.matrix(params)?.mul(&theirs.pair.matrix)?, perm: theirs.pair.perm.clone() };
    Ok(SharedSecret { pair: emult(&start, &mine.braid, &params.tvalues)? })
}

/// One honest exchange: both parties' keys and both computed secrets.
#[derive(Clone, Debug)]
pub struct Exchange {
    pub alice: PrivateKey,
    pub bob: PrivateKey,
    pub alice_public: PublicKey,
    pub bob_public: PublicKey,
    pub alice_secret: SharedSecret,
    pub bob_secret: SharedSecret,
}

impl Exchange {
    pub fn agrees(&self) -> bool {
        self.alice_secret == self.bob_secret
    }
}

pub fn run_exchange(
    params: &SystemParams,
    word_len: usize,
    poly_deg: usize,
    alice_rng: &mut LabRng,
    bob_rng: &mut LabRng,
) -> Result<Exchange, AedhError> {
    let alice = gen_private(params, Side::Alice, word_len, poly_deg, alice_rng)?;
    let bob = gen_private(params, Side::Bob, word_len, poly_deg, bob_rng)?;
    let alice_public = compute_public(params, &alice)?;
    let bob_public = compute_public(params, &bob)?;
    let alice_secret = compute_shared(params, &alice, &bob_public)?;
    let bob_secret = compute_shared(params, &bob, &alice_public)?;
    Ok(Exchange { alice, bob, alice_public, bob_public, alice_secret, bob_secret })
}
