//! Factorization of a target permutation as a word in the conjugates'
//! permutations, by bidirectional breadth-first search.

use std::collections::HashMap;

use crate::braid::{free_reduce_letters, random_index_word};
use crate::perm::Permutation;
use crate::rng::LabRng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found {
        word: Vec<i32>,
        states: u64,
    },
    /// One side enumerated its whole orbit without meeting the other.
    NotInSubgroup {
        states: u64,
    },
    Exhausted {
        states: u64,
    },
}

/// Parent links: `perm -> (previous perm, letter)`.
type Tree = HashMap<Permutation, Option<(Permutation, i32)>>;

/// Signed generators `±j` with their permutations and inverses.
fn signed_generators(perms: &[Permutation]) -> Vec<(i32, Permutation, Permutation)> {
    let mut out = Vec::with_capacity(2 * perms.len());
    for (j, p) in perms.iter().enumerate() {
        let inv = p.inverse();
        out.push((j as i32 + 1, p.clone(), inv.clone()));
        out.push((-(j as i32 + 1), inv, p.clone()));
    }
    out
}

fn forward_path(tree: &Tree, mut at: Permutation) -> Vec<i32> {
    let mut letters = Vec::new();
    while let Some(Some((prev, letter))) = tree.get(&at) {
        letters.push(*letter);
        at = prev.clone();
    }
    letters.reverse();
    letters
}

/// In the backward tree a link `x -> (y, l)` means `x · l = y`.
fn backward_path(tree: &Tree, mut at: Permutation) -> Vec<i32> {
    let mut letters = Vec::new();
    while let Some(Some((next, letter))) = tree.get(&at) {
        letters.push(*letter);
        at = next.clone();
    }
    letters
}

enum Round {
    Met(Permutation),
    Closed,
    Open,
}

fn expand_level(
    tree: &mut Tree,
    other: &Tree,
    frontier: &mut Vec<Permutation>,
    gens: &[(i32, Permutation, Permutation)],
    backward: bool,
) -> Round {
    let mut next = Vec::new();
    for x in frontier.iter() {
        for (letter, g, g_inv) in gens {
            // backward: x' · letter = x, so x' = x · letter^{-1}
            let y = if backward { x.then(g_inv) } else { x.then(g) };
            if tree.contains_key(&y) {
                continue;
            }
            tree.insert(y.clone(), Some((x.clone(), *letter)));
            if other.contains_key(&y) {
                return Round::Met(y);
            }
            next.push(y);
        }
    }
    *frontier = next;
    if frontier.is_empty() {
        Round::Closed
    } else {
        Round::Open
    }
}

/// Searches for a signed index word over `perms` whose product is `target`.
///
/// `max_states` bounds the combined size of both search trees per attempt.
/// After an attempt runs out, up to `restarts` further attempts start the
/// forward side from a random word of length at most `prefix_len`.
pub fn find_word(
    perms: &[Permutation],
    target: &Permutation,
    max_states: usize,
    restarts: usize,
    prefix_len: usize,
    rng: &mut LabRng,
) -> SearchOutcome {
    let n = target.n();
    let gens = signed_generators(perms);
    let mut total = 0u64;
    for attempt in 0..=restarts {
        let prefix: Vec<i32> =
            if attempt == 0 || prefix_len == 0 { Vec::new() } else { random_index_word(perms.len(), prefix_len, rng) };
        let start = prefix.iter().fold(Permutation::identity(n), |acc, &l| {
            let (_, g, _) = gens.iter().find(|(x, _, _)| *x == l).expect("prefix letter in range");
            acc.then(g)
        });
        let mut fwd: Tree = HashMap::from([(start.clone(), None)]);
        let mut bwd: Tree = HashMap::from([(target.clone(), None)]);
        if start == *target {
            return SearchOutcome::Found { word: free_reduce_letters(&prefix), states: total + 1 };
        }
        let mut ff = vec![start];
        let mut bf = vec![target.clone()];
        loop {
            let forward = ff.len() <= bf.len();
            let round = if forward {
                expand_level(&mut fwd, &bwd, &mut ff, &gens, false)
            } else {
                expand_level(&mut bwd, &fwd, &mut bf, &gens, true)
            };
            let states = fwd.len() + bwd.len();
            match round {
                Round::Met(p) => {
                    total += states as u64;
                    let mut word = prefix.clone();
                    word.extend(forward_path(&fwd, p.clone()));
                    word.extend(backward_path(&bwd, p));
                    return SearchOutcome::Found { word: free_reduce_letters(&word), states: total };
                }
                // an orbit closed without meeting: target lies outside the subgroup
                Round::Closed => return SearchOutcome::NotInSubgroup { states: total + states as u64 },
                Round::Open if states >= max_states => {
                    total += states as u64;
                    break;
                }
                Round::Open => {}
            }
        }
    }
    SearchOutcome::Exhausted { states: total }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product(perms: &[Permutation], word: &[i32]) -> Permutation {
        word.iter().fold(Permutation::identity(perms[0].n()), |acc, &l| {
            let p = &perms[l.unsigned_abs() as usize - 1];
            acc.then(&if l > 0 { p.clone() } else { p.inverse() })
        })
    }

    fn random_perms(n: usize, k: usize, rng: &mut LabRng) -> Vec<Permutation> {
        (0..k)
            .map(|_| {
                let mut v: Vec<usize> = (1..=n).collect();
                rng.shuffle(&mut v);
                Permutation::from_images(&v).unwrap()
            })
            .collect()
    }

    #[test]
    fn identity_and_single_generator() {
        let mut rng = LabRng::from_seed(1);
        let perms = random_perms(8, 4, &mut rng);
        let id = Permutation::identity(8);
        assert_eq!(find_word(&perms, &id, 1000, 0, 0, &mut rng), SearchOutcome::Found { word: vec![], states: 1 });
        match find_word(&perms, &perms[0], 1000, 0, 0, &mut rng) {
            SearchOutcome::Found { word, .. } => {
                assert_eq!(word.len(), 1);
                assert_eq!(product(&perms, &word), perms[0]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn planted_words_recompose() {
        let mut rng = LabRng::from_seed(2);
        for _ in 0..30 {
            let perms = random_perms(8, 4, &mut rng);
            let planted = random_index_word(4, 6, &mut rng);
            let target = product(&perms, &planted);
            match find_word(&perms, &target, 200_000, 2, 4, &mut rng) {
                SearchOutcome::Found { word, .. } => assert_eq!(product(&perms, &word), target),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn detects_targets_outside_the_subgroup() {
        let mut rng = LabRng::from_seed(3);
        // two commuting transpositions generate a group of order 4
        let a = Permutation::from_cycles(6, &[vec![1, 2]]).unwrap();
        let b = Permutation::from_cycles(6, &[vec![3, 4]]).unwrap();
        let target = Permutation::from_cycles(6, &[vec![5, 6]]).unwrap();
        assert!(matches!(find_word(&[a, b], &target, 1000, 0, 0, &mut rng), SearchOutcome::NotInSubgroup { .. }));
    }

    #[test]
    fn tiny_cap_exhausts() {
        let mut rng = LabRng::from_seed(4);
        let perms = random_perms(12, 2, &mut rng);
        let planted = random_index_word(2, 12, &mut rng);
        let target = product(&perms, &planted);
        if target.is_identity() {
            return;
        }
        let got = find_word(&perms, &target, 3, 1, 2, &mut rng);
        assert!(matches!(got, SearchOutcome::Exhausted { .. } | SearchOutcome::Found { .. }));
        if let SearchOutcome::Found { word, .. } = got {
            assert_eq!(product(&perms, &word), target);
        }
    }
}
