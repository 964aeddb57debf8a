//! A laboratory for the Algebraic Eraser Diffie–Hellman key agreement.
//!
//! The crate implements the protocol over the evaluated colored Burau
//! representation, a linear-algebra shared-secret recovery
//! attack, and a defense that publishes conjugates whose permutations are
//! products of disjoint prime-length cycles. [`experiment`] drives seeded
//! trials over all three and [`serial`] defines the JSON artifacts.

pub mod aedh;
pub mod attack;
pub mod braid;
pub mod defense;
pub mod emult;
pub mod experiment;
pub mod ffield;
pub mod invariants;
pub mod perm;
pub mod rng;
pub mod serial;
