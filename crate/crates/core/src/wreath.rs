//! Finite sets, chains of set maps `S₁ ← S₂ ← ⋯ ← Sₙ` and their isomorphisms.
//!
//! A chain is the same data as a labeled level-n tree: the root sits below
//! `S₁`, each element of `Sᵢ` is a vertex at height `i`, and the top level
//! `Sₙ` is the set of leaves. Chains are stored contravariantly: `maps[i]`
//! sends indices of `levels[i + 1]` to indices of `levels[i]`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Element of a finite set. `Star` is the reserved point used by the bottom
/// degeneracy and never appears in user-supplied sets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Star,
    Num(u32),
    Name(Arc<str>),
}

const FORBIDDEN: &[char] = &[',', '|', '>', '[', ']', ';', '-', '{', '}', '"', '⋆'];

impl Atom {
    pub fn num(n: u32) -> Self {
        Atom::Num(n)
    }

    pub fn name(s: &str) -> Result<Self> {
        match Atom::parse(s)? {
            Atom::Star => Err(Error::arg("the atom ⋆ is reserved")),
            a => Ok(a),
        }
    }

    /// Parses one atom. Canonical decimal numerals become `Num`, `⋆` becomes
    /// `Star`, anything else without separator characters is a name.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "⋆" {
            return Ok(Atom::Star);
        }
        if t.is_empty() {
            return Err(Error::parse(format!("atom {s:?}"), "empty atom"));
        }
        if t.chars().any(|c| c.is_whitespace() || FORBIDDEN.contains(&c)) {
            return Err(Error::parse(
                format!("atom {t:?}"),
                "atoms may not contain whitespace or any of , | > [ ] ; - { } \" ⋆",
            ));
        }
        let canonical_numeral = t.bytes().all(|b| b.is_ascii_digit()) && (t == "0" || !t.starts_with('0'));
        if canonical_numeral {
            if let Ok(n) = t.parse::<u32>() {
                return Ok(Atom::Num(n));
            }
        }
        Ok(Atom::Name(Arc::from(t)))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Star => write!(f, "⋆"),
            Atom::Num(n) => write!(f, "{n}"),
            Atom::Name(s) => write!(f, "{s}"),
        }
    }
}

/// Finite set of atoms kept in ascending order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinSet {
    elems: Vec<Atom>,
}

impl FinSet {
    pub fn new(mut elems: Vec<Atom>) -> Result<Self> {
        elems.sort();
        if let Some(w) = elems.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::arg(format!("duplicate atom {}", w[0])));
        }
        Ok(FinSet { elems })
    }

    pub fn empty() -> Self {
        FinSet { elems: Vec::new() }
    }

    /// The standard set `{1, …, n}`.
    pub fn standard(n: usize) -> Self {
        FinSet {
            elems: (1..=n as u32).map(Atom::Num).collect(),
        }
    }

    pub fn star() -> Self {
        FinSet {
            elems: vec![Atom::Star],
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.elems
    }

    pub fn get(&self, i: usize) -> &Atom {
        &self.elems[i]
    }

    pub fn index_of(&self, a: &Atom) -> Option<usize> {
        self.elems.binary_search(a).ok()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.index_of(a).is_some()
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A total function between finite sets, stored by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetMap {
    pub dom: FinSet,
    pub cod: FinSet,
    pub assignment: Vec<usize>,
}

impl SetMap {
    pub fn new(dom: FinSet, cod: FinSet, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != dom.len() || assignment.iter().any(|&t| t >= cod.len()) {
            return Err(Error::arg("set map assignment does not fit its domain/codomain"));
        }
        Ok(SetMap {
            dom,
            cod,
            assignment,
        })
    }

    /// Preimage of codomain element `t`, in domain order.
    pub fn fiber(&self, t: usize) -> Vec<usize> {
        (0..self.dom.len()).filter(|&s| self.assignment[s] == t).collect()
    }
}

/// A vertex of the level tree of a chain together with its incoming edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    /// 0 for the root; `j` for elements of `levels[j - 1]`.
    pub depth: usize,
    /// Index of the element in `levels[depth - 1]`; `None` for the root.
    pub elem: Option<usize>,
    /// Indices in `levels[depth]` of the elements mapping to this vertex.
    pub fiber: Vec<usize>,
}

/// An object of the wreath product category: a chain `S₁ ← ⋯ ← Sₙ`, n ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chain {
    levels: Vec<FinSet>,
    maps: Vec<Vec<usize>>,
}

impl Chain {
    pub fn new(levels: Vec<FinSet>, maps: Vec<Vec<usize>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::arg("a chain needs at least one level"));
        }
        if maps.len() + 1 != levels.len() {
            return Err(Error::arg(format!(
                "{} levels need {} maps, got {}",
                levels.len(),
                levels.len() - 1,
                maps.len()
            )));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.len() != levels[i + 1].len() || m.iter().any(|&p| p >= levels[i].len()) {
                return Err(Error::arg(format!("map {} does not fit its levels", i + 1)));
            }
        }
        Ok(Chain { levels, maps })
    }

    /// Builds a chain from atom-valued assignments `(element, image)` per level.
    pub fn from_assignments(levels: Vec<FinSet>, maps: &[Vec<(Atom, Atom)>]) -> Result<Self> {
        if maps.len() + 1 != levels.len() {
            return Err(Error::arg("wrong number of maps"));
        }
        let mut idx_maps = Vec::with_capacity(maps.len());
        for (i, pairs) in maps.iter().enumerate() {
            let mut m = vec![usize::MAX; levels[i + 1].len()];
            for (a, b) in pairs {
                let ia = levels[i + 1]
                    .index_of(a)
                    .ok_or_else(|| Error::arg(format!("{a} is not in level {}", i + 2)))?;
                let ib = levels[i]
                    .index_of(b)
                    .ok_or_else(|| Error::arg(format!("{b} is not in level {}", i + 1)))?;
                m[ia] = ib;
            }
            if let Some(k) = m.iter().position(|&v| v == usize::MAX) {
                return Err(Error::arg(format!("{} has no image", levels[i + 1].get(k))));
            }
            idx_maps.push(m);
        }
        Chain::new(levels, idx_maps)
    }

    pub fn single(s: FinSet) -> Self {
        Chain {
            levels: vec![s],
            maps: Vec::new(),
        }
    }

    /// Number of levels n.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn levels(&self) -> &[FinSet] {
        &self.levels
    }

    /// Level `S_{i+1}` (zero-based index).
    pub fn level(&self, i: usize) -> &FinSet {
        &self.levels[i]
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    /// The map `levels[i + 1] → levels[i]`.
    pub fn set_map(&self, i: usize) -> SetMap {
        SetMap {
            dom: self.levels[i + 1].clone(),
            cod: self.levels[i].clone(),
            assignment: self.maps[i].clone(),
        }
    }

    pub fn top(&self) -> &FinSet {
        self.levels.last().expect("nonempty chain")
    }

    /// The leaf functor: forgets all but the top level.
    pub fn gamma(&self) -> FinSet {
        self.top().clone()
    }

    /// Indices in `levels[j + 1]` mapping to element `e` of `levels[j]`.
    pub fn children(&self, j: usize, e: usize) -> Vec<usize> {
        self.maps[j]
            .iter()
            .enumerate()
            .filter_map(|(k, &p)| (p == e).then_some(k))
            .collect()
    }

    fn all_children(&self, j: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.levels[j].len()];
        for (k, &p) in self.maps[j].iter().enumerate() {
            out[p].push(k);
        }
        out
    }

    /// Face ∂ᵢ for 1 ≤ i ≤ n−1: drops `S₁` when i = 1, otherwise removes `Sᵢ`
    /// and composes the two adjacent maps.
    pub fn face(&self, i: usize) -> Result<Chain> {
        let n = self.len();
        if n < 2 || i == 0 || i >= n {
            return Err(Error::arg(format!("face index {i} out of range for a {n}-chain")));
        }
        let mut levels = self.levels.clone();
        let mut maps = self.maps.clone();
        levels.remove(i - 1);
        if i == 1 {
            maps.remove(0);
        } else {
            let upper = maps.remove(i - 1);
            let lower = &maps[i - 2];
            maps[i - 2] = upper.iter().map(|&k| lower[k]).collect();
        }
        Ok(Chain { levels, maps })
    }

    /// Degeneracy sᵢ for 0 ≤ i ≤ n: s₀ inserts the reserved point `{⋆}` at the
    /// bottom, sᵢ (i ≥ 1) doubles `Sᵢ` with an identity map.
    pub fn degeneracy(&self, i: usize) -> Result<Chain> {
        let n = self.len();
        if i > n {
            return Err(Error::arg(format!(
                "degeneracy index {i} out of range for a {n}-chain"
            )));
        }
        let mut levels = self.levels.clone();
        let mut maps = self.maps.clone();
        if i == 0 {
            self.check_reserved()?;
            maps.insert(0, vec![0; levels[0].len()]);
            levels.insert(0, FinSet::star());
        } else {
            let copy = levels[i - 1].clone();
            maps.insert(i - 1, (0..copy.len()).collect());
            levels.insert(i, copy);
        }
        Ok(Chain { levels, maps })
    }

    /// Rejects chains using `⋆` anywhere except in a bottom run of `{⋆}`
    /// levels produced by earlier bottom degeneracies.
    pub fn check_reserved(&self) -> Result<()> {
        let run = self.levels.iter().take_while(|l| **l == FinSet::star()).count();
        for (j, l) in self.levels.iter().enumerate().skip(run) {
            if l.contains(&Atom::Star) {
                return Err(Error::arg(format!(
                    "level {} uses the reserved atom ⋆",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Vertices in tensor-factor order: the root, then the elements of each
    /// non-top level bottom-up in atom order.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.vertex_count());
        out.push(Vertex {
            depth: 0,
            elem: None,
            fiber: (0..self.levels[0].len()).collect(),
        });
        for j in 0..self.len() - 1 {
            for (e, fiber) in self.all_children(j).into_iter().enumerate() {
                out.push(Vertex {
                    depth: j + 1,
                    elem: Some(e),
                    fiber,
                });
            }
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        1 + self.levels[..self.len() - 1]
            .iter()
            .map(FinSet::len)
            .sum::<usize>()
    }

    /// Position in [`Chain::vertices`] of element `e` of `levels[j]`.
    pub fn vertex_index(&self, j: usize, e: usize) -> usize {
        1 + self.levels[..j].iter().map(FinSet::len).sum::<usize>() + e
    }

    /// Canonical representative of the isomorphism class of the chain, with
    /// the isomorphism from `self` to it. All levels are relabeled `1..`.
    pub fn canonical(&self) -> (Chain, ChainIso) {
        self.canonical_impl(false)
    }

    /// Canonical representative under isomorphisms that are the identity on
    /// the top level. The top level keeps its atoms.
    pub fn canonical_over_top(&self) -> (Chain, ChainIso) {
        self.canonical_impl(true)
    }

    /// Subtree signatures per level: equal signatures at one level mean
    /// isomorphic subtrees (over the top level when `keep_top`).
    fn signatures(&self, keep_top: bool) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut sig = vec![Vec::new(); n];
        let top = self.levels[n - 1].len();
        sig[n - 1] = if keep_top {
            (0..top).collect()
        } else {
            vec![0; top]
        };
        for j in (0..n - 1).rev() {
            let mut keys: Vec<Vec<usize>> = vec![Vec::new(); self.levels[j].len()];
            for (k, &p) in self.maps[j].iter().enumerate() {
                keys[p].push(sig[j + 1][k]);
            }
            for key in &mut keys {
                key.sort_unstable();
            }
            let mut distinct = keys.clone();
            distinct.sort();
            distinct.dedup();
            sig[j] = keys
                .iter()
                .map(|k| distinct.binary_search(k).expect("present"))
                .collect();
        }
        sig
    }

    fn canonical_impl(&self, keep_top: bool) -> (Chain, ChainIso) {
        let n = self.len();
        let sig = self.signatures(keep_top);
        let mut pos: Vec<Vec<usize>> = Vec::with_capacity(n);
        for j in 0..n {
            let len = self.levels[j].len();
            if keep_top && j == n - 1 {
                pos.push((0..len).collect());
                break;
            }
            let mut order: Vec<usize> = (0..len).collect();
            if j == 0 {
                order.sort_by_key(|&k| (sig[0][k], k));
            } else {
                let parent_pos = &pos[j - 1];
                let m = &self.maps[j - 1];
                order.sort_by_key(|&k| (parent_pos[m[k]], sig[j][k], k));
            }
            let mut p = vec![0; len];
            for (new, &old) in order.iter().enumerate() {
                p[old] = new;
            }
            pos.push(p);
        }
        let levels: Vec<FinSet> = (0..n)
            .map(|j| {
                if keep_top && j == n - 1 {
                    self.levels[j].clone()
                } else {
                    FinSet::standard(self.levels[j].len())
                }
            })
            .collect();
        let maps = (0..n - 1)
            .map(|j| {
                let mut m = vec![0; self.levels[j + 1].len()];
                for (k, &p) in self.maps[j].iter().enumerate() {
                    m[pos[j + 1][k]] = pos[j][p];
                }
                m
            })
            .collect();
        (Chain { levels, maps }, ChainIso { components: pos })
    }

    /// Generators of the automorphism group fixing the top level pointwise,
    /// for a chain in over-top canonical form: transpositions of adjacent
    /// isomorphic sibling subtrees.
    pub fn over_top_generators(&self) -> Vec<ChainIso> {
        let n = self.len();
        let sig = self.signatures(true);
        let children: Vec<Vec<Vec<usize>>> = (0..n - 1).map(|j| self.all_children(j)).collect();
        let mut gens = Vec::new();
        for j in 0..n - 1 {
            let groups: Vec<Vec<usize>> = if j == 0 {
                vec![(0..self.levels[0].len()).collect()]
            } else {
                children[j - 1].clone()
            };
            for sib in groups {
                let mut by_sig: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for &e in &sib {
                    by_sig.entry(sig[j][e]).or_default().push(e);
                }
                for same in by_sig.values() {
                    for w in same.windows(2) {
                        let mut iso = ChainIso::identity(self);
                        swap_subtrees(&children, &mut iso.components, j, w[0], w[1]);
                        gens.push(iso);
                    }
                }
            }
        }
        gens
    }

    /// Chain with the same shape and the given atoms on every level; atoms are
    /// assigned in level order.
    fn relabeled(&self, levels: Vec<FinSet>) -> Chain {
        Chain {
            levels,
            maps: self.maps.clone(),
        }
    }

    /// The chain obtained by pushing `self` forward along per-level bijections
    /// `comps` onto sets `targets`: `comps[j][k]` is the target index of
    /// element `k` of level `j`.
    pub fn transport(&self, comps: &[Vec<usize>], targets: Vec<FinSet>) -> Result<(Chain, ChainIso)> {
        if comps.len() != self.len() || targets.len() != self.len() {
            return Err(Error::arg("transport needs one bijection per level"));
        }
        let mut maps = Vec::with_capacity(self.len() - 1);
        for j in 0..self.len() - 1 {
            let mut m = vec![0; targets[j + 1].len()];
            for (k, &p) in self.maps[j].iter().enumerate() {
                m[comps[j + 1][k]] = comps[j][p];
            }
            maps.push(m);
        }
        let target = Chain::new(targets, maps)?;
        let iso = ChainIso {
            components: comps.to_vec(),
        };
        iso.check(self, &target)?;
        Ok((target, iso))
    }
}

fn swap_subtrees(children: &[Vec<Vec<usize>>], comps: &mut [Vec<usize>], j: usize, a: usize, b: usize) {
    comps[j][a] = b;
    comps[j][b] = a;
    if j < children.len() {
        let (ca, cb) = (&children[j][a], &children[j][b]);
        debug_assert_eq!(ca.len(), cb.len());
        for (&x, &y) in ca.iter().zip(cb) {
            swap_subtrees(children, comps, j + 1, x, y);
        }
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (j, level) in self.levels.iter().enumerate() {
            if j > 0 {
                write!(f, " | ")?;
            }
            for (k, a) in level.atoms().iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                if j == 0 {
                    write!(f, "{a}")?;
                } else {
                    write!(f, "{a}>{}", self.levels[j - 1].get(self.maps[j - 1][k]))?;
                }
            }
        }
        write!(f, "]")
    }
}

impl FromStr for Chain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::parse(format!("chain {t:?}"), "expected [ ... ]"))?;
        let parts: Vec<&str> = inner.split('|').collect();
        let mut levels = Vec::with_capacity(parts.len());
        let mut pairs: Vec<Vec<(Atom, Atom)>> = Vec::new();
        for (j, part) in parts.iter().enumerate() {
            let mut atoms = Vec::new();
            let mut level_pairs = Vec::new();
            let part = part.trim();
            if !part.is_empty() {
                for tok in part.split(',') {
                    let loc = || format!("chain level {}, element {:?}", j + 1, tok.trim());
                    if j == 0 {
                        if tok.contains('>') {
                            return Err(Error::parse(loc(), "bottom level elements have no image"));
                        }
                        atoms.push(Atom::parse(tok).map_err(|e| Error::parse(loc(), e.to_string()))?);
                    } else {
                        let (a, b) = tok
                            .split_once('>')
                            .ok_or_else(|| Error::parse(loc(), "expected element>image"))?;
                        let a = Atom::parse(a).map_err(|e| Error::parse(loc(), e.to_string()))?;
                        let b = Atom::parse(b).map_err(|e| Error::parse(loc(), e.to_string()))?;
                        atoms.push(a.clone());
                        level_pairs.push((a, b));
                    }
                }
            }
            let set = FinSet::new(atoms)
                .map_err(|e| Error::parse(format!("chain level {}", j + 1), e.to_string()))?;
            levels.push(set);
            if j > 0 {
                pairs.push(level_pairs);
            }
        }
        let chain = Chain::from_assignments(levels, &pairs)
            .map_err(|e| Error::parse(format!("chain {t:?}"), e.to_string()))?;
        chain
            .check_reserved()
            .map_err(|e| Error::parse(format!("chain {t:?}"), e.to_string()))?;
        Ok(chain)
    }
}

impl Serialize for Chain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Chain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Levelwise bijections between two chains commuting with their maps.
/// `components[j][k]` is the target index of element `k` of level `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainIso {
    pub components: Vec<Vec<usize>>,
}

impl ChainIso {
    pub fn identity(c: &Chain) -> Self {
        ChainIso {
            components: c.levels.iter().map(|l| (0..l.len()).collect()).collect(),
        }
    }

    /// Verifies bijectivity and naturality σⱼ ∘ fⱼ = f′ⱼ ∘ σⱼ₊₁.
    pub fn check(&self, source: &Chain, target: &Chain) -> Result<()> {
        if self.components.len() != source.len() || target.len() != source.len() {
            return Err(Error::arg("isomorphism between chains of different lengths"));
        }
        for (j, comp) in self.components.iter().enumerate() {
            let len = source.levels[j].len();
            if comp.len() != len || target.levels[j].len() != len {
                return Err(Error::arg(format!("level {} sizes differ", j + 1)));
            }
            let distinct: HashSet<_> = comp.iter().collect();
            if distinct.len() != len || comp.iter().any(|&x| x >= len) {
                return Err(Error::arg(format!("component {} is not a bijection", j + 1)));
            }
        }
        for j in 0..source.len() - 1 {
            for (k, &p) in source.maps[j].iter().enumerate() {
                if self.components[j][p] != target.maps[j][self.components[j + 1][k]] {
                    return Err(Error::arg(format!("not natural at level {}", j + 2)));
                }
            }
        }
        Ok(())
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &ChainIso) -> ChainIso {
        ChainIso {
            components: self
                .components
                .iter()
                .zip(&first.components)
                .map(|(s, f)| f.iter().map(|&k| s[k]).collect())
                .collect(),
        }
    }

    pub fn inverse(&self) -> ChainIso {
        ChainIso {
            components: self.components.iter().map(|c| invert(c)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.iter().enumerate().all(|(i, &x)| i == x))
    }

    /// For each vertex of `source` (in [`Chain::vertices`] order): the index of
    /// its image vertex in `target` and the induced bijection of incoming
    /// edges as a permutation of fiber positions.
    pub fn vertex_transport(&self, source: &Chain, target: &Chain) -> Vec<(usize, Vec<usize>)> {
        let tv = target.vertices();
        let mut pos_in_fiber: Vec<Vec<usize>> = Vec::with_capacity(target.len());
        for j in 0..target.len() {
            pos_in_fiber.push(vec![0; target.levels[j].len()]);
        }
        for v in &tv {
            for (l, &k) in v.fiber.iter().enumerate() {
                pos_in_fiber[v.depth][k] = l;
            }
        }
        source
            .vertices()
            .into_iter()
            .map(|v| {
                let ti = match v.elem {
                    None => 0,
                    Some(e) => target.vertex_index(v.depth - 1, self.components[v.depth - 1][e]),
                };
                let perm = v
                    .fiber
                    .iter()
                    .map(|&k| pos_in_fiber[v.depth][self.components[v.depth][k]])
                    .collect();
                (ti, perm)
            })
            .collect()
    }
}

pub fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// A chain whose top level is empty: a level tree without leaves.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BarChain(Chain);

impl BarChain {
    pub fn new(c: Chain) -> Result<Self> {
        if !c.top().is_empty() {
            return Err(Error::arg("a bar chain must have an empty top level"));
        }
        Ok(BarChain(c))
    }

    /// The bar chain `S₁ ← ⋯ ← Sₖ ← ∅` on the given lower levels.
    pub fn from_levels(levels: Vec<FinSet>, maps: Vec<Vec<usize>>) -> Result<Self> {
        let mut levels = levels;
        let mut maps = maps;
        if !levels.is_empty() {
            maps.push(Vec::new());
        }
        levels.push(FinSet::empty());
        BarChain::new(Chain::new(levels, maps)?)
    }

    pub fn chain(&self) -> &Chain {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn face(&self, i: usize) -> Result<BarChain> {
        Ok(BarChain(self.0.face(i)?))
    }

    /// `i = len` doubles the empty top level.
    pub fn degeneracy(&self, i: usize) -> Result<BarChain> {
        Ok(BarChain(self.0.degeneracy(i)?))
    }

    pub fn gamma(&self) -> FinSet {
        FinSet::empty()
    }
}

impl fmt::Display for BarChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Isomorphism class of chains over a fixed top set, with its automorphisms
/// fixing the top pointwise.
#[derive(Clone, Debug)]
pub struct FiberClass {
    pub representative: Chain,
    pub automorphisms: Vec<ChainIso>,
}

/// Which fiber sizes may occur at each vertex depth, and how many elements
/// each lower level may have.
pub struct FiberBounds<'a> {
    /// Maximum size of `levels[j]` for `j < n - 1`.
    pub level_max: Vec<usize>,
    /// `admissible(depth, size)`: whether a vertex at `depth` may have
    /// `size` incoming edges.
    pub admissible: &'a (dyn Fn(usize, usize) -> bool + Sync),
}

/// Canonical over-top representatives of all n-chains with top `s`, together
/// with generators of their over-top automorphism groups, sorted.
pub fn fiber_classes(s: &FinSet, n: usize, bounds: &FiberBounds<'_>) -> Vec<(Chain, Vec<ChainIso>)> {
    assert!(n >= 1);
    assert!(bounds.level_max.len() + 1 >= n);
    if n == 1 {
        let c = Chain::single(s.clone());
        return if (bounds.admissible)(0, s.len()) {
            vec![(c, Vec::new())]
        } else {
            Vec::new()
        };
    }
    let mut found: BTreeSet<Chain> = BTreeSet::new();
    let mut maps: Vec<Vec<usize>> = vec![Vec::new(); n - 1];
    let mut sizes = vec![0usize; n];
    sizes[n - 1] = s.len();
    extend_down(s, n, n - 2, &mut sizes, &mut maps, bounds, &mut found);
    found
        .into_iter()
        .map(|c| {
            let g = c.over_top_generators();
            (c, g)
        })
        .collect()
}

fn extend_down(
    s: &FinSet,
    n: usize,
    j: usize,
    sizes: &mut Vec<usize>,
    maps: &mut Vec<Vec<usize>>,
    bounds: &FiberBounds<'_>,
    found: &mut BTreeSet<Chain>,
) {
    let m = sizes[j + 1];
    let max = bounds.level_max[j];
    let depth = j + 1;
    let empty_ok = (bounds.admissible)(depth, 0);
    for rgs in restricted_growth(m, max) {
        let blocks = rgs.iter().copied().max().map_or(0, |b| b + 1);
        let mut counts = vec![0usize; blocks];
        for &b in &rgs {
            counts[b] += 1;
        }
        if counts.iter().any(|&c| !(bounds.admissible)(depth, c)) {
            continue;
        }
        let extra_max = if empty_ok { max - blocks } else { 0 };
        for extra in 0..=extra_max {
            let size = blocks + extra;
            sizes[j] = size;
            maps[j] = rgs.clone();
            if j == 0 {
                if !(bounds.admissible)(0, size) {
                    continue;
                }
                let mut levels: Vec<FinSet> = sizes[..n - 1].iter().map(|&k| FinSet::standard(k)).collect();
                levels.push(s.clone());
                let c = Chain {
                    levels,
                    maps: maps.clone(),
                };
                found.insert(c.canonical_over_top().0);
            } else {
                extend_down(s, n, j - 1, sizes, maps, bounds, found);
            }
        }
    }
}

/// Restricted growth strings of length `m` with at most `max` distinct
/// values: the set partitions of `0..m` into at most `max` blocks.
fn restricted_growth(m: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn go(m: usize, max: usize, next: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for b in 0..=next.min(max.saturating_sub(1)) {
            if b == next && next >= max {
                break;
            }
            cur.push(b);
            go(m, max, next.max(b + 1), cur, out);
            cur.pop();
        }
    }
    go(m, max, 0, &mut cur, &mut out);
    out
}

/// All isomorphism classes of n-chains with top `s` whose lower levels have
/// at most `bounds[j]` elements, each with its full over-top automorphism
/// group.
pub fn enumerate_fiber(s: &FinSet, n: usize, bounds: &[usize]) -> Vec<FiberClass> {
    if n >= 2 && bounds.len() < n - 1 {
        return Vec::new();
    }
    let any = |_: usize, _: usize| true;
    let fb = FiberBounds {
        level_max: bounds.to_vec(),
        admissible: &any,
    };
    fiber_classes(s, n, &fb)
        .into_iter()
        .map(|(c, gens)| FiberClass {
            automorphisms: close_group(&c, &gens),
            representative: c,
        })
        .collect()
}

/// All isomorphism classes (no level fixed) of n-chains whose levels have
/// at most `max_set` elements and whose top has at most `max_top`.
pub fn enumerate_iso_classes(n: usize, max_top: usize, max_set: usize) -> Vec<Chain> {
    let any = |_: usize, _: usize| true;
    let fb = FiberBounds {
        level_max: vec![max_set; n.saturating_sub(1)],
        admissible: &any,
    };
    let mut out = BTreeSet::new();
    for m in 0..=max_top {
        for (c, _) in fiber_classes(&FinSet::standard(m), n, &fb) {
            out.insert(c.canonical().0);
        }
    }
    out.into_iter().collect()
}

fn close_group(c: &Chain, gens: &[ChainIso]) -> Vec<ChainIso> {
    let mut elems = vec![ChainIso::identity(c)];
    let mut seen: HashSet<ChainIso> = elems.iter().cloned().collect();
    let mut i = 0;
    while i < elems.len() {
        let g = elems[i].clone();
        for s in gens {
            let h = s.compose(&g);
            if seen.insert(h.clone()) {
                elems.push(h);
            }
        }
        i += 1;
    }
    elems
}

impl Chain {
    /// The same chain with its top level replaced by `top`, matched by order.
    pub fn with_top(&self, top: FinSet) -> Result<Chain> {
        if top.len() != self.top().len() {
            return Err(Error::arg("replacement top level has the wrong size"));
        }
        let mut c = self.clone();
        *c.levels.last_mut().expect("nonempty") = top;
        Ok(c)
    }

    /// Keeps the levels with the given ascending indices, composing maps
    /// across the dropped ones. The top level must be kept.
    pub fn restrict_levels(&self, keep: &[usize]) -> Chain {
        assert_eq!(keep.last(), Some(&(self.len() - 1)), "top level must be kept");
        let levels = keep.iter().map(|&j| self.levels[j].clone()).collect();
        let maps = keep
            .windows(2)
            .map(|w| {
                (0..self.levels[w[1]].len())
                    .map(|mut k| {
                        for j in (w[0]..w[1]).rev() {
                            k = self.maps[j][k];
                        }
                        k
                    })
                    .collect()
            })
            .collect();
        Chain { levels, maps }
    }

    /// The part of the level tree above a vertex, `len` levels high: for the
    /// root, levels `0..len`; for element `e` of level `j`, the descendants
    /// of `e` in levels `j+1..=j+len`. Returns the subchain, the original
    /// level index of its first level, and the original indices of its
    /// elements per level.
    pub fn subtree(&self, vertex: Option<(usize, usize)>, len: usize) -> (Chain, usize, Vec<Vec<usize>>) {
        let (start, first): (usize, Vec<usize>) = match vertex {
            None => (0, (0..self.levels[0].len()).collect()),
            Some((j, e)) => (j + 1, self.children(j, e)),
        };
        let mut idx = vec![first];
        for t in 1..len {
            let below = &idx[t - 1];
            let m = &self.maps[start + t - 1];
            let next: Vec<usize> = (0..m.len()).filter(|&k| below.binary_search(&m[k]).is_ok()).collect();
            idx.push(next);
        }
        let levels = idx
            .iter()
            .enumerate()
            .map(|(t, ks)| FinSet {
                elems: ks.iter().map(|&k| self.levels[start + t].get(k).clone()).collect(),
            })
            .collect();
        let maps = (1..len)
            .map(|t| {
                let m = &self.maps[start + t - 1];
                idx[t]
                    .iter()
                    .map(|&k| idx[t - 1].binary_search(&m[k]).expect("parent present"))
                    .collect()
            })
            .collect();
        (Chain { levels, maps }, start, idx)
    }

    /// The chain pulled back along a permutation of the top level: element
    /// `k` of the top of `self` becomes element `perm[k]`; lower levels and
    /// atoms are unchanged.
    pub fn permute_top(&self, perm: &[usize]) -> Chain {
        let n = self.len();
        let mut c = self.relabeled(self.levels.clone());
        if n >= 2 {
            let old = &self.maps[n - 2];
            let mut m = vec![0; old.len()];
            for (k, &p) in old.iter().enumerate() {
                m[perm[k]] = p;
            }
            c.maps[n - 2] = m;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(s: &str) -> Chain {
        s.parse().unwrap()
    }

    #[test]
    fn face_examples() {
        let c = ch("[x | a>x,b>x | p>a,q>a,r>b]");
        assert_eq!(c.face(2).unwrap(), ch("[x | p>x,q>x,r>x]"));
        assert_eq!(c.face(1).unwrap(), ch("[a,b | p>a,q>a,r>b]"));
        assert_eq!(ch("[a,b | p>a,q>b]").face(1).unwrap(), ch("[p,q]"));
        assert!(c.face(0).is_err());
        assert!(c.face(3).is_err());
    }

    #[test]
    fn degeneracy_examples() {
        let c = ch("[i,j,k]");
        let s0 = c.degeneracy(0).unwrap();
        assert_eq!(s0.level(0), &FinSet::star());
        assert_eq!(s0.maps()[0], vec![0, 0, 0]);
        assert_eq!(c.degeneracy(1).unwrap(), ch("[i,j,k | i>i,j>j,k>k]"));
        assert_eq!(
            ch("[x | a>x,b>x]").degeneracy(1).unwrap(),
            ch("[x | x>x | a>x,b>x]")
        );
        assert!(c.degeneracy(2).is_err());
    }

    #[test]
    fn reserved_atom_rejected() {
        assert!("[⋆ | a>⋆]".parse::<Chain>().is_ok());
        assert!("[a,⋆]".parse::<Chain>().is_err());
        let bad = Chain::single(FinSet::new(vec![Atom::Star, Atom::Num(1)]).unwrap());
        assert!(bad.degeneracy(0).is_err());
    }

    #[test]
    fn gamma_examples() {
        let c = ch("[i1,i2,i3 | j1>i1,j2>i1,j3>i1,k1>i3,k2>i3]");
        assert_eq!(c.gamma().to_string(), "j1,j2,j3,k1,k2");
        assert_eq!(ch("[x | a>x | ]").gamma(), FinSet::empty());
    }

    #[test]
    fn text_round_trip() {
        for s in ["[x | a>x,b>x | p>a,q>a,r>b]", "[a,b | ]", "[]", "[ | ]", "[1,2,10]"] {
            assert_eq!(ch(s).to_string(), s);
        }
        assert!("[a | b>c]".parse::<Chain>().is_err());
        assert!("[a,a]".parse::<Chain>().is_err());
        assert!("a,b".parse::<Chain>().is_err());
    }

    #[test]
    fn canonical_is_idempotent_and_witnessed() {
        let c = ch("[b,a | q>b,p>a,r>a]");
        let (k, iso) = c.canonical();
        iso.check(&c, &k).unwrap();
        assert_eq!(k.canonical().0, k);
        let d = ch("[a,b | q>b,p>b,r>a]");
        assert_eq!(d.canonical().0, k);
    }

    #[test]
    fn fiber_counts() {
        let s = FinSet::standard(2);
        let classes = enumerate_fiber(&s, 2, &[2]);
        assert_eq!(classes.len(), 3);
        assert!(classes.iter().all(|c| c.automorphisms.len() == 1));
        let classes = enumerate_fiber(&s, 2, &[3]);
        assert_eq!(classes.len(), 5);
        let orders: Vec<usize> = classes.iter().map(|c| c.automorphisms.len()).collect();
        assert_eq!(orders.iter().filter(|&&o| o == 2).count(), 1);
        assert_eq!(enumerate_fiber(&FinSet::empty(), 2, &[1]).len(), 2);
    }

    #[test]
    fn vertex_transport_of_identity() {
        let c = ch("[x | a>x,b>x | p>a,q>a,r>b]");
        let t = ChainIso::identity(&c).vertex_transport(&c, &c);
        assert_eq!(t.len(), c.vertex_count());
        for (i, (j, p)) in t.iter().enumerate() {
            assert_eq!(i, *j);
            assert!(p.iter().enumerate().all(|(a, &b)| a == b));
        }
    }

    #[test]
    fn permutations_count() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn bar_chain_ops() {
        let b = BarChain::new(ch("[a,b | ]")).unwrap();
        assert_eq!(b.face(1).unwrap().chain(), &ch("[]"));
        assert_eq!(b.degeneracy(2).unwrap().chain(), &ch("[a,b | | ]"));
        let c = BarChain::new(ch("[x | a>x,b>x | ]")).unwrap();
        assert_eq!(c.face(2).unwrap().chain(), &ch("[x | ]"));
        assert!(BarChain::new(ch("[a]")).is_err());
    }
}
