//! Seeded, portable randomness.
//!
//! Every random choice in the lab flows through [`LabRng`], a ChaCha8 stream
//! (the `rand_chacha` keystream, 64-bit words taken little-endian). Seeds are
//! derived hierarchically: a [`SeedTree`] node holds a 32-byte key and a child
//! key is `SHA-256(parent_key || 0x00 || label)`. A root is built from a `u64`
//! as `SHA-256("ae-lab/root" || seed.to_le_bytes())`.
//!
//! Bounded integers are drawn by rejection from `next_u64` so the mapping from
//! keystream to values has no implementation-defined shortcuts and can be
//! replayed from another language.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// A node in the labeled seed-derivation tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedTree {
    key: [u8; 32],
}

impl SeedTree {
    pub fn root(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"ae-lab/root");
        h.update(seed.to_le_bytes());
        SeedTree { key: h.finalize().into() }
    }

    pub fn child(&self, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update([0u8]);
        h.update(label.as_bytes());
        SeedTree { key: h.finalize().into() }
    }

    /// Child keyed by a label and an index, e.g. `("trial", 7)`.
    pub fn indexed(&self, label: &str, index: u64) -> Self {
        self.child(&format!("{label}/{index}"))
    }

    pub fn rng(&self) -> LabRng {
        LabRng { inner: ChaCha8Rng::from_seed(self.key) }
    }
}

/// Deterministic random source used throughout the crate.
#[derive(Clone, Debug)]
pub struct LabRng {
    inner: ChaCha8Rng,
}

impl LabRng {
    pub fn from_seed(seed: u64) -> Self {
        SeedTree::root(seed).rng()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, bound)`.
    ///
    /// # Panics
    /// If `bound == 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0)");
        // largest multiple of `bound` that fits; draws at or above it are rejected
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    pub fn below_usize(&mut self, bound: usize) -> usize {
        self.below(bound as u64) as usize
    }

    /// Uniform integer in `[lo, hi]` (inclusive).
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi);
        lo + self.below_usize(hi - lo + 1)
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Fisher–Yates, drawing indices from the high end down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below_usize(i + 1);
            items.swap(i, j);
        }
    }

    pub fn choose<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below_usize(items.len())]
    }
}
