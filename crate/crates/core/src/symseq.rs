//! Symmetric sequences: arity-indexed free ℤ-modules with Σₙ-actions.
//!
//! Values are stored skeletally on the standard sets `{1..n}`. A permutation
//! `π` is a slice with `π[l]` the new position of position `l`; the action of
//! a bijection of finite sets is the action of the permutation comparing
//! their canonical orders.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Report;
use crate::wreath::{permutations, Atom, FinSet};
use crate::zmodule::{FreeMod, Matrix, SignedImage, SignedPerm, Tag};

/// Anything that behaves like a symmetric sequence: finitely many nonzero
/// arities, each a free module with a Σₙ-action by integer matrices.
pub trait SymFunctor: Send + Sync {
    fn rank(&self, arity: usize) -> usize;

    /// An arity bound above which every value is zero.
    fn max_support(&self) -> usize;

    /// The matrix of `π` acting on the arity-`π.len()` value.
    fn act(&self, perm: &[usize]) -> Matrix;

    fn supports(&self, arity: usize) -> bool {
        self.rank(arity) > 0
    }
}

/// Adjacent transpositions `t_k = (k, k+1)` whose product, applied left to
/// right, is `π`: `π = t_{k_m} ∘ ⋯ ∘ t_{k_1}` for the returned `[k_1, …, k_m]`.
pub fn transposition_word(perm: &[usize]) -> Vec<usize> {
    let mut arr = perm.to_vec();
    let mut word = Vec::new();
    let n = arr.len();
    for pass in 0..n {
        for k in 0..n.saturating_sub(1 + pass) {
            if arr[k] > arr[k + 1] {
                arr.swap(k, k + 1);
                word.push(k);
            }
        }
    }
    word
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArityData {
    pub basis: Vec<String>,
    /// Generator `k` is the action of the transposition `(k, k+1)`.
    pub generators: Vec<Vec<SignedImage>>,
}

/// A symmetric sequence given by bases and adjacent-transposition generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymSeq {
    max_arity: usize,
    #[serde(rename = "arity")]
    arities: BTreeMap<usize, ArityData>,
}

impl SymSeq {
    pub fn new(max_arity: usize, arities: BTreeMap<usize, ArityData>) -> Result<Self> {
        for (&n, data) in &arities {
            if n > max_arity {
                return Err(Error::arg(format!("arity {n} exceeds max_arity {max_arity}")));
            }
            if data.generators.len() != n.saturating_sub(1) {
                return Err(Error::arg(format!(
                    "arity {n} needs {} generators, got {}",
                    n.saturating_sub(1),
                    data.generators.len()
                )));
            }
            for (k, g) in data.generators.iter().enumerate() {
                let p = SignedPerm { images: g.clone() };
                if p.len() != data.basis.len() {
                    return Err(Error::arg(format!("arity {n} generator {k} has wrong length")));
                }
                p.validate()
                    .map_err(|e| Error::arg(format!("arity {n} generator {k}: {e}")))?;
            }
        }
        Ok(SymSeq { max_arity, arities })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SymSeq = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("symseq line {} column {}", e.line(), e.column()), e.to_string()))?;
        SymSeq::new(raw.max_arity, raw.arities)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    /// Builds a sequence from generator matrices given as closures.
    pub fn from_fn(
        max_arity: usize,
        mut value: impl FnMut(usize) -> Option<(Vec<String>, Vec<SignedPerm>)>,
    ) -> Result<Self> {
        let mut arities = BTreeMap::new();
        for n in 0..=max_arity {
            if let Some((basis, gens)) = value(n) {
                arities.insert(
                    n,
                    ArityData {
                        basis,
                        generators: gens.into_iter().map(|g| g.images).collect(),
                    },
                );
            }
        }
        SymSeq::new(max_arity, arities)
    }

    /// The zero sequence.
    pub fn zero() -> Self {
        SymSeq {
            max_arity: 0,
            arities: BTreeMap::new(),
        }
    }

    /// The counit sequence: the unit module in arity 1, zero elsewhere.
    pub fn counit() -> Self {
        let mut arities = BTreeMap::new();
        arities.insert(
            1,
            ArityData {
                basis: vec!["1".into()],
                generators: Vec::new(),
            },
        );
        SymSeq {
            max_arity: 1,
            arities,
        }
    }

    /// A module concentrated in arity 0.
    pub fn concentrated_in_zero(basis: Vec<String>) -> Self {
        let mut arities = BTreeMap::new();
        if !basis.is_empty() {
            arities.insert(
                0,
                ArityData {
                    basis,
                    generators: Vec::new(),
                },
            );
        }
        SymSeq {
            max_arity: 0,
            arities,
        }
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn arity(&self, n: usize) -> Option<&ArityData> {
        self.arities.get(&n)
    }

    pub fn arities(&self) -> &BTreeMap<usize, ArityData> {
        &self.arities
    }

    /// Mutable access for building deliberately broken inputs in tests and
    /// negative controls.
    pub fn arity_mut(&mut self, n: usize) -> Option<&mut ArityData> {
        self.arities.get_mut(&n)
    }

    pub fn basis(&self, n: usize) -> &[String] {
        self.arities.get(&n).map_or(&[], |d| &d.basis)
    }

    pub fn module(&self, n: usize) -> FreeMod {
        FreeMod::new(self.basis(n).iter().map(|b| Tag::Named(b.clone())).collect())
            .expect("distinct basis")
    }

    fn generator(&self, n: usize, k: usize) -> SignedPerm {
        SignedPerm {
            images: self.arities[&n].generators[k].clone(),
        }
    }

    /// `ρ(π)` as a signed permutation of the arity-`π.len()` basis.
    pub fn act_signed(&self, perm: &[usize]) -> SignedPerm {
        let n = perm.len();
        let rank = self.rank(n);
        let mut r = SignedPerm::identity(rank);
        if rank == 0 {
            return r;
        }
        for k in transposition_word(perm) {
            r = self.generator(n, k).compose(&r);
        }
        r
    }

    /// `A(S)`: the arity-|S| value with basis tags decorated by `s`.
    pub fn evaluate(&self, s: &FinSet) -> FreeMod {
        FreeMod::new(
            self.basis(s.len())
                .iter()
                .map(|b| Tag::Word(vec![Tag::Named(b.clone()), Tag::Named(format!("{{{s}}}"))]))
                .collect(),
        )
        .expect("distinct basis")
    }

    /// Action along a bijection `beta: S → T`, given by the images
    /// `beta[i] ∈ T` of the atoms of `S` in order.
    pub fn transport(&self, s: &FinSet, t: &FinSet, beta: &[Atom]) -> Result<Matrix> {
        if s.len() != t.len() || beta.len() != s.len() {
            return Err(Error::arg("transport needs a bijection of equal-size sets"));
        }
        let mut perm = Vec::with_capacity(beta.len());
        let mut seen = vec![false; t.len()];
        for b in beta {
            let j = t
                .index_of(b)
                .ok_or_else(|| Error::arg(format!("{b} is not in the target set")))?;
            if seen[j] {
                return Err(Error::arg("transport map is not injective"));
            }
            seen[j] = true;
            perm.push(j);
        }
        Ok(self.act(&perm))
    }

    /// Checks the Coxeter relations of the generators in every arity.
    pub fn check_action(&self) -> Report {
        let mut report = Report::new();
        for (&n, data) in &self.arities {
            let rank = data.basis.len();
            let id = SignedPerm::identity(rank);
            let g = |k: usize| self.generator(n, k);
            for k in 0..data.generators.len() {
                let inst = format!("arity {n}, s{}", k + 1);
                report.record(
                    "action.involution",
                    inst,
                    if g(k).compose(&g(k)) == id {
                        Ok(())
                    } else {
                        Err(format!("s{0}² ≠ 1 in arity {n}", k + 1))
                    },
                );
                if k + 1 < data.generators.len() {
                    let st = g(k).compose(&g(k + 1));
                    let cube = st.compose(&st).compose(&st);
                    report.record(
                        "action.braid",
                        format!("arity {n}, s{} s{}", k + 1, k + 2),
                        if cube == id {
                            Ok(())
                        } else {
                            Err(format!("(s{} s{})³ ≠ 1 in arity {n}", k + 1, k + 2))
                        },
                    );
                }
                for l in k + 2..data.generators.len() {
                    report.record(
                        "action.commute",
                        format!("arity {n}, s{} s{}", k + 1, l + 1),
                        if g(k).compose(&g(l)) == g(l).compose(&g(k)) {
                            Ok(())
                        } else {
                            Err(format!("s{} s{} ≠ s{} s{} in arity {n}", k + 1, l + 1, l + 1, k + 1))
                        },
                    );
                }
            }
        }
        report
    }
}

impl SymFunctor for SymSeq {
    fn rank(&self, arity: usize) -> usize {
        self.basis(arity).len()
    }

    fn max_support(&self) -> usize {
        self.arities
            .iter()
            .filter(|(_, d)| !d.basis.is_empty())
            .map(|(&n, _)| n)
            .max()
            .unwrap_or(0)
    }

    fn act(&self, perm: &[usize]) -> Matrix {
        self.act_signed(perm).to_matrix()
    }
}

impl<T: SymFunctor + ?Sized> SymFunctor for Arc<T> {
    fn rank(&self, arity: usize) -> usize {
        (**self).rank(arity)
    }

    fn max_support(&self) -> usize {
        (**self).max_support()
    }

    fn act(&self, perm: &[usize]) -> Matrix {
        (**self).act(perm)
    }
}

/// Composition of permutations: `(p ∘ q)[l] = p[q[l]]`.
pub fn compose_perm(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&l| p[l]).collect()
}

/// Arity-wise linear maps between two symmetric sequences.
#[derive(Clone, Debug)]
pub struct SeqMorphism {
    pub components: BTreeMap<usize, Matrix>,
}

impl SeqMorphism {
    /// Checks `component ∘ ρ_src(σ) = ρ_tgt(σ) ∘ component` on adjacent
    /// transpositions, and on all of Σₙ for n ≤ 4.
    pub fn check_equivariance(&self, src: &dyn SymFunctor, tgt: &dyn SymFunctor) -> Report {
        let mut report = Report::new();
        for (&n, m) in &self.components {
            let mut perms: Vec<Vec<usize>> = (0..n.saturating_sub(1))
                .map(|k| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.swap(k, k + 1);
                    p
                })
                .collect();
            if n <= 4 {
                perms.extend(permutations(n));
            }
            for p in perms {
                let lhs = m.mul(&src.act(&p));
                let rhs = tgt.act(&p).mul(m);
                report.record(
                    "morphism.equivariance",
                    format!("arity {n}, π = {p:?}"),
                    match lhs.first_difference(&rhs) {
                        None => Ok(()),
                        Some((r, c, a, b)) => Err(format!("entry ({r},{c}): {a} vs {b}")),
                    },
                );
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign_seq() -> SymSeq {
        SymSeq::from_fn(2, |n| {
            (n == 2).then(|| {
                (
                    vec!["e".into()],
                    vec![SignedPerm {
                        images: vec![SignedImage { to: 0, sign: -1 }],
                    }],
                )
            })
        })
        .unwrap()
    }

    #[test]
    fn counit_ranks() {
        let u = SymSeq::counit();
        assert_eq!(u.rank(1), 1);
        assert_eq!(u.rank(0), 0);
        assert_eq!(u.rank(4), 0);
        assert!(u.check_action().all_pass());
    }

    #[test]
    fn transport_sign() {
        let a = sign_seq();
        let s = FinSet::standard(2);
        let m = a.transport(&s, &s, &[Atom::Num(2), Atom::Num(1)]).unwrap();
        assert_eq!(m, Matrix::from_rows(&[vec![-1]], 1));
        let id = a.transport(&s, &s, &[Atom::Num(1), Atom::Num(2)]).unwrap();
        assert!(id.is_identity());
    }

    fn standard_rep(n: usize) -> SymSeq {
        SymSeq::from_fn(n, |k| {
            (k == n).then(|| {
                let basis = (0..n).map(|i| format!("e{i}")).collect();
                let gens = (0..n - 1)
                    .map(|t| {
                        let mut p = SignedPerm::identity(n);
                        p.images.swap(t, t + 1);
                        p
                    })
                    .collect();
                (basis, gens)
            })
        })
        .unwrap()
    }

    #[test]
    fn action_matches_permutation_and_is_multiplicative() {
        let a = standard_rep(4);
        for p in permutations(4) {
            let m = a.act(&p);
            for l in 0..4 {
                assert_eq!(m.column_nonzeros(l), vec![(p[l], 1)]);
            }
            for q in permutations(4) {
                assert_eq!(a.act(&compose_perm(&p, &q)), m.mul(&a.act(&q)));
            }
        }
        assert!(transposition_word(&[0, 1, 2]).is_empty());
        assert_eq!(transposition_word(&[1, 0]), vec![0]);
    }

    #[test]
    fn json_round_trip() {
        let a = sign_seq();
        let s = a.to_json();
        assert_eq!(
            s,
            r#"{"max_arity":2,"arity":{"2":{"basis":["e"],"generators":[[{"to":0,"sign":-1}]]}}}"#
        );
        assert_eq!(SymSeq::from_json(&s).unwrap().to_json(), s);
    }

    #[test]
    fn corrupted_braid_detected() {
        // Σ₃ acting on ℤ² with s1 = swap, s2 = identity violates the braid relation.
        let swap = SignedPerm {
            images: vec![SignedImage { to: 1, sign: 1 }, SignedImage { to: 0, sign: 1 }],
        };
        let a = SymSeq::from_fn(3, |n| {
            (n == 3).then(|| (vec!["a".into(), "b".into()], vec![swap.clone(), SignedPerm::identity(2)]))
        })
        .unwrap();
        let r = a.check_action();
        assert!(!r.all_pass());
        assert!(r.failures().any(|e| e.check == "action.braid"));
    }
}
