//! Property tests for the algebraic building blocks.

use std::sync::OnceLock;

use proptest::prelude::*;

use coopkit::cdc::{collapsible, complex_basis, reduced_homology};
use coopkit::compose::{tensor_map, Block};
use coopkit::graphco::graph_seq;
use coopkit::symseq::{compose_perm, SymFunctor};
use coopkit::wreath::{enumerate_iso_classes, invert, Chain};
use coopkit::zmodule::{smith_invariants, solve_exact, Lattice, Matrix};

fn chains3() -> &'static [Chain] {
    static C: OnceLock<Vec<Chain>> = OnceLock::new();
    C.get_or_init(|| enumerate_iso_classes(3, 3, 3))
}

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-3i64..=3, rows * cols)
        .prop_map(move |v| Matrix::from_rows(&v.chunks(cols.max(1)).map(<[i64]>::to_vec).collect::<Vec<_>>()[..rows], cols))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn face_after_degeneracy_is_identity(k in 0usize..1000) {
        let cs = chains3();
        let c = &cs[k % cs.len()];
        prop_assert_eq!(&c.degeneracy(0).unwrap().face(1).unwrap(), c);
        for i in 1..=c.len() {
            let d = c.degeneracy(i).unwrap();
            prop_assert_eq!(&d.face(i).unwrap(), c);
            if i < c.len() {
                prop_assert_eq!(&d.face(i + 1).unwrap(), c);
            }
        }
    }

    #[test]
    fn faces_commute(k in 0usize..1000) {
        let cs = chains3();
        let c = &cs[k % cs.len()];
        // ∂ᵢ∂ⱼ = ∂ⱼ₋₁∂ᵢ for i < j.
        prop_assert_eq!(c.face(2).unwrap().face(1).unwrap(), c.face(1).unwrap().face(1).unwrap());
    }

    #[test]
    fn canonical_form_is_invariant(k in 0usize..1000, seed in any::<u64>()) {
        let cs = chains3();
        let c = &cs[k % cs.len()];
        let comps: Vec<Vec<usize>> = c
            .levels()
            .iter()
            .enumerate()
            .map(|(j, l)| {
                let mut p: Vec<usize> = (0..l.len()).collect();
                let n = p.len();
                for i in 0..n {
                    p.swap(i, ((seed >> (j * 7 + i)) as usize) % n);
                }
                p
            })
            .collect();
        let (moved, iso) = c.transport(&comps, c.levels().to_vec()).unwrap();
        prop_assert!(iso.check(c, &moved).is_ok());
        prop_assert_eq!(c.canonical().0, moved.canonical().0);
    }

    #[test]
    fn solve_exact_recovers_solutions(b in matrix(2, 3), x in matrix(3, 2)) {
        // [I; B] always has full column rank.
        let mut rows: Vec<Vec<i64>> = (0..3).map(|i| (0..3).map(|j| i64::from(i == j)).collect()).collect();
        rows.extend((0..2).map(|i| b.row(i).to_vec()));
        let a = Matrix::from_rows(&rows, 3);
        prop_assert_eq!(solve_exact(&a, &a.mul(&x)), Some(x));
    }

    #[test]
    fn hermite_basis_ignores_generator_order(m in matrix(3, 4), p in perm(3)) {
        let gens: Vec<Vec<i64>> = (0..3).map(|i| m.row(i).to_vec()).collect();
        let shuffled: Vec<Vec<i64>> = p.iter().map(|&i| gens[i].clone()).collect();
        let mut combined = shuffled.clone();
        combined[0] = combined[0].iter().zip(&combined[1]).map(|(a, b)| a + 2 * b).collect();
        let l = Lattice::from_generators(4, gens);
        let (l2, l3) = (Lattice::from_generators(4, shuffled), Lattice::from_generators(4, combined));
        prop_assert_eq!(l.basis(), l2.basis());
        prop_assert_eq!(l.basis(), l3.basis());
    }

    #[test]
    fn smith_invariants_divide_and_multiply(m in matrix(3, 3)) {
        let inv = smith_invariants(&m);
        for w in inv.windows(2) {
            prop_assert_eq!(w[1] % w[0], 0);
        }
        // The rank and the absolute determinant are read off the invariants.
        let det = {
            let r: Vec<&[i64]> = (0..3).map(|i| m.row(i)).collect();
            r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
                + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
        };
        if inv.len() == 3 {
            prop_assert_eq!(inv.iter().product::<i64>(), det.abs());
        } else {
            prop_assert_eq!(det, 0);
        }
    }

    #[test]
    fn identity_blocks_give_identity(r0 in 0usize..4, r1 in 0usize..4, r2 in 0usize..4) {
        let ranks = [r0, r1, r2];
        let blocks: Vec<Block> = (0..3).map(|i| Block::single(i, i, Matrix::identity(ranks[i]))).collect();
        let m = tensor_map(&ranks, &ranks, &blocks);
        prop_assert!(m.is_identity());
    }

    #[test]
    fn tree_action_is_multiplicative(p in perm(4), q in perm(4), directed in any::<bool>()) {
        let s = graph_seq(4, directed);
        prop_assert_eq!(s.act(&compose_perm(&p, &q)), s.act(&p).mul(&s.act(&q)));
    }

    #[test]
    fn complexes_relabel_consistently(k in 0usize..1000, p in perm(4)) {
        let basis = complex_basis(4, 1);
        let x = &basis.complexes[k % basis.len()];
        let y = x.relabel(&p);
        prop_assert!(basis.index_of(&y).is_some());
        prop_assert_eq!(&y.relabel(&invert(&p)), x);
        prop_assert!(collapsible(&y));
        prop_assert!(reduced_homology(&y).vanishes());
    }
}

