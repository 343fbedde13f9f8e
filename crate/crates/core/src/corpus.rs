//! Seeded random inputs: small symmetric sequences and corrupted graph
//! cooperads.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cooperad::Cooperad;
use crate::graphco::{Corruption, GraphCooperad};
use crate::symseq::SymSeq;
use crate::wreath::enumerate_iso_classes;
use crate::zmodule::{SignedImage, SignedPerm};

/// Bounds for random sequences.
#[derive(Clone, Copy, Debug)]
pub struct SeqBounds {
    pub min_arity: usize,
    pub max_arity: usize,
    pub max_rank: usize,
    pub max_support: usize,
}

impl Default for SeqBounds {
    fn default() -> Self {
        SeqBounds {
            min_arity: 0,
            max_arity: 3,
            max_rank: 2,
            max_support: 3,
        }
    }
}

/// The involutions of a rank-`r` signed basis, for `r ≤ 2`.
fn involutions(r: usize) -> Vec<SignedPerm> {
    let im = |to, sign| SignedImage { to, sign };
    match r {
        1 => vec![
            SignedPerm { images: vec![im(0, 1)] },
            SignedPerm { images: vec![im(0, -1)] },
        ],
        2 => {
            let mut out = Vec::new();
            for s0 in [1, -1] {
                for s1 in [1, -1] {
                    out.push(SignedPerm {
                        images: vec![im(0, s0), im(1, s1)],
                    });
                }
            }
            for s in [1, -1] {
                out.push(SignedPerm {
                    images: vec![im(1, s), im(0, s)],
                });
            }
            out
        }
        _ => unimplemented!("ranks above 2"),
    }
}

/// A random sequence: a support of at most `max_support` arities, each
/// carrying a signed permutation module of rank at most `max_rank ≤ 2`.
/// Every transposition acts by the same involution, which always defines
/// a representation of the symmetric group.
pub fn random_symseq(rng: &mut impl Rng, bounds: SeqBounds, tag: &str) -> SymSeq {
    let mut arities: Vec<usize> = (bounds.min_arity..=bounds.max_arity).collect();
    arities.shuffle(rng);
    let size = rng.gen_range(1..=bounds.max_support.min(arities.len()));
    let support = &arities[..size];
    SymSeq::from_fn(bounds.max_arity, |n| {
        if !support.contains(&n) {
            return None;
        }
        let r = rng.gen_range(1..=bounds.max_rank.min(2));
        let g = involutions(r).choose(rng).expect("nonempty").clone();
        let names = (0..r).map(|i| format!("{tag}{n}_{i}")).collect();
        Some((names, vec![g; n.saturating_sub(1)]))
    })
    .expect("valid random sequence")
}

/// `count` seeded pairs `(A, B)` for the Kan extension comparison.
pub fn kan_corpus(seed: u64, count: usize, bounds: SeqBounds) -> Vec<(Arc<SymSeq>, Arc<SymSeq>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = random_symseq(&mut rng, bounds, "a");
            let b = random_symseq(&mut rng, bounds, "b");
            (Arc::new(a), Arc::new(b))
        })
        .collect()
}

/// `count` seeded sequences for associativity diagrams. Arity 0 is best
/// excluded here: it lets intermediate levels grow with the product of the
/// supports, which nested composites compound.
pub fn seq_corpus(seed: u64, count: usize, bounds: SeqBounds) -> Vec<Arc<SymSeq>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| Arc::new(random_symseq(&mut rng, bounds, &format!("x{i}_"))))
        .collect()
}

/// The three negative controls on the undirected graph cooperad: a sign
/// flip at a seeded nonzero column of a seeded 2-chain, the dropped zero
/// case and a doubled counit.
pub fn negative_controls(seed: u64, max_set: usize) -> Vec<(&'static str, GraphCooperad)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gr = GraphCooperad::new(max_set, false);
    let candidates: Vec<_> = enumerate_iso_classes(2, max_set, max_set)
        .into_iter()
        .filter_map(|c| {
            let m = gr.cocomp(&c).ok()?;
            let cols: Vec<usize> = (0..m.cols())
                .filter(|&j| (0..m.rows()).any(|i| m.get(i, j) != 0))
                .collect();
            (!cols.is_empty() && c.level(0).len() >= 2 && c.top().len() > c.level(0).len()).then_some((c, cols))
        })
        .collect();
    let (chain, cols) = candidates.choose(&mut rng).expect("a nonzero cocomposition").clone();
    let column = *cols.choose(&mut rng).expect("nonzero column");
    vec![
        ("sign-flip", gr.clone().corrupted(Corruption::SignFlip { chain, column })),
        ("dropped-zero-case", gr.clone().corrupted(Corruption::DroppedZeroCase)),
        ("wrong-counit", gr.corrupted(Corruption::WrongCounit)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Report;

    #[test]
    fn random_sequences_are_valid_and_seeded() {
        let a = kan_corpus(7, 5, SeqBounds::default());
        let b = kan_corpus(7, 5, SeqBounds::default());
        for ((x, y), (u, v)) in a.iter().zip(&b) {
            assert_eq!(x.to_json(), u.to_json());
            assert_eq!(y.to_json(), v.to_json());
            let r: Report = x.check_action();
            assert!(r.all_pass(), "{}", r.to_text());
            assert!(x.arities().len() <= 3);
            assert!(x.arities().values().all(|d| d.basis.len() <= 2));
        }
    }
}
