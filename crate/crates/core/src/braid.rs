//! Words in the Artin generators of the braid group `B_N`.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::Permutation;
use crate::rng::LabRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BraidError {
    #[error("letter {letter} is not a generator of B_{n}")]
    BadLetter { letter: i32, n: usize },
    #[error("braid words on {0} and {1} strands cannot be combined")]
    StrandMismatch(usize, usize),
    #[error("B_{0} has no two commuting generator bands (need at least 5 strands)")]
    TooFewStrands(usize),
    #[error("empty generator alphabet")]
    EmptyAlphabet,
}

/// A braid word: letter `±i` stands for `b_i^{±1}`, `1 <= i <= N-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    n: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(n: usize, letters: Vec<i32>) -> Result<Self, BraidError> {
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize >= n) {
            return Err(BraidError::BadLetter { letter: bad, n });
        }
        Ok(BraidWord { n, letters })
    }

    pub fn identity(n: usize) -> Self {
        BraidWord { n, letters: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Reversed, sign-flipped word.
    pub fn inverse(&self) -> BraidWord {
        BraidWord { n: self.n, letters: self.letters.iter().rev().map(|&l| -l).collect() }
    }

    /// Concatenation, freely reduced.
    pub fn concat(&self, other: &BraidWord) -> Result<BraidWord, BraidError> {
        if self.n != other.n {
            return Err(BraidError::StrandMismatch(self.n, other.n));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { n: self.n, letters }.free_reduce())
    }

    /// `w^e` for `e >= 0`, without reduction.
    pub fn repeat(&self, e: usize) -> BraidWord {
        BraidWord { n: self.n, letters: self.letters.repeat(e) }
    }

    /// Cancels adjacent `b_i b_i^{-1}` pairs until none remain.
    pub fn free_reduce(&self) -> BraidWord {
        BraidWord { n: self.n, letters: free_reduce_letters(&self.letters) }
    }

    /// `σ_β`: product of the letters' simple transpositions, left to right.
    pub fn permutation(&self) -> Permutation {
        let mut p = Permutation::identity(self.n);
        for &l in &self.letters {
            p.then_swap(l.unsigned_abs() as usize - 1);
        }
        p
    }
}

pub(crate) fn free_reduce_letters<T: Copy + PartialEq + std::ops::Neg<Output = T>>(letters: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// `permutation_of`
pub fn permutation_of(w: &BraidWord) -> Permutation {
    w.permutation()
}

/// `z a z^{-1}`, freely reduced.
pub fn conjugate(z: &BraidWord, a: &BraidWord) -> Result<BraidWord, BraidError> {
    z.concat(a)?.concat(&z.inverse())
}

/// Two generator index ranges whose words commute with each other:
/// `{1..⌊n/2⌋-1}` and `{⌊n/2⌋+1..n-1}`. Indices in different bands differ by
/// at least two, so the far-commutation relation applies letter by letter.
pub fn commuting_bands(n: usize) -> Result<(RangeInclusive<usize>, RangeInclusive<usize>), BraidError> {
    if n < 5 {
        return Err(BraidError::TooFewStrands(n));
    }
    let h = n / 2;
    Ok((1..=h - 1, h + 1..=n - 1))
}

/// `length` letters drawn uniformly from `alphabet` with uniform signs, then freely reduced.
pub fn random_word(n: usize, length: usize, alphabet: &[usize], rng: &mut LabRng) -> Result<BraidWord, BraidError> {
    if alphabet.is_empty() {
        return Err(BraidError::EmptyAlphabet);
    }
    if let Some(&bad) = alphabet.iter().find(|&&i| i == 0 || i >= n) {
        return Err(BraidError::BadLetter { letter: bad as i32, n });
    }
    let letters: Vec<i32> = (0..length)
        .map(|_| {
            let i = *rng.choose(alphabet) as i32;
            if rng.coin() {
                i
            } else {
                -i
            }
        })
        .collect();
    Ok(BraidWord { n, letters }.free_reduce())
}

/// A positive braid whose permutation is `perm`.
///
/// Bubble-sorts the image table by adjacent position swaps; the swap sequence,
/// read in order, is the word. Length is the inversion count, at most `N(N-1)/2`.
pub fn braid_preimage(perm: &Permutation) -> BraidWord {
    let mut table = perm.images_one_based();
    let n = table.len();
    let mut letters = Vec::new();
    loop {
        let mut swapped = false;
        for j in 0..n.saturating_sub(1) {
            if table[j] > table[j + 1] {
                table.swap(j, j + 1);
                letters.push(j as i32 + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    BraidWord { n, letters }
}

/// The published conjugates `z a_i z^{-1}` of one user, with their permutations cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugateSet {
    n: usize,
    words: Vec<BraidWord>,
    perms: Vec<Permutation>,
}

impl ConjugateSet {
    pub fn new(n: usize, words: Vec<BraidWord>) -> Result<Self, BraidError> {
        if words.is_empty() {
            return Err(BraidError::EmptyAlphabet);
        }
        if let Some(w) = words.iter().find(|w| w.n != n) {
            return Err(BraidError::StrandMismatch(n, w.n));
        }
        let perms = words.iter().map(BraidWord::permutation).collect();
        Ok(ConjugateSet { n, words, perms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[BraidWord] {
        &self.words
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    /// Expands a signed 1-based index word (`-j` for the inverse of conjugate `j`)
    /// into Artin letters, freely reduced.
    pub fn expand(&self, index_word: &[i32]) -> Result<BraidWord, BraidError> {
        let mut letters = Vec::new();
        for &j in index_word {
            let idx = j.unsigned_abs() as usize;
            if j == 0 || idx > self.words.len() {
                return Err(BraidError::BadLetter { letter: j, n: self.words.len() + 1 });
            }
            let w = &self.words[idx - 1];
            if j > 0 {
                letters.extend_from_slice(&w.letters);
            } else {
                letters.extend(w.letters.iter().rev().map(|&l| -l));
            }
        }
        Ok(BraidWord { n: self.n, letters: free_reduce_letters(&letters) })
    }

    /// Permutation of an index word, from the cached permutations.
    pub fn index_word_permutation(&self, index_word: &[i32]) -> Permutation {
        let mut p = Permutation::identity(self.n);
        for &j in index_word {
            let q = &self.perms[j.unsigned_abs() as usize - 1];
            p = if j > 0 { p.then(q) } else { p.then(&q.inverse()) };
        }
        p
    }
}

/// A random word over `k` group generators as signed 1-based indices.
///
/// The length is uniform in `1..=max_len` and no letter is immediately
/// followed by its own inverse, so sampled words are freely reduced.
pub fn random_index_word(k: usize, max_len: usize, rng: &mut LabRng) -> Vec<i32> {
    assert!(k > 0 && max_len > 0);
    let len = rng.range_inclusive(1, max_len);
    let mut word: Vec<i32> = Vec::with_capacity(len);
    while word.len() < len {
        let j = 1 + rng.below_usize(k) as i32;
        let letter = if rng.coin() { j } else { -j };
        if word.last() == Some(&-letter) {
            continue;
        }
        word.push(letter);
    }
    word
}
