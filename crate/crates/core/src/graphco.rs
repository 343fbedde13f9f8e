//! The graph cooperad: labeled trees with contraction cocomposition, and its
//! directed variant where reversing an edge negates the graph.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use crate::cooperad::Cooperad;
use crate::compose::Functor;
use crate::error::{Error, Result};
use crate::symseq::SymSeq;
use crate::wreath::{Atom, Chain, FinSet};
use crate::zmodule::{Matrix, SignedImage, SignedPerm};

/// A tree on the vertices `0..n`, edges `(a, b)` with `a < b`, sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tree {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Tree {
    /// Normalizes edge orientation and order; returns the number of edges
    /// that had to be reversed.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> (Tree, usize) {
        let mut flips = 0;
        let mut e: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| {
                if a > b {
                    flips += 1;
                    (b, a)
                } else {
                    (a, b)
                }
            })
            .collect();
        e.sort_unstable();
        (Tree { n, edges: e }, flips)
    }

    /// Whether the edges form a spanning tree of `0..n`.
    pub fn is_tree(n: usize, edges: &[(usize, usize)]) -> bool {
        if n == 0 || edges.len() + 1 != n {
            return false;
        }
        let mut uf = UnionFind::new(n);
        edges.iter().all(|&(a, b)| uf.union(a, b))
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    /// Joins two classes; false if they were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

fn prufer_decode(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf, x));
        degree[leaf] = 0;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// All labeled trees on `0..n` in canonical (sorted edge list) order.
pub fn enumerate_trees(n: usize) -> Vec<Tree> {
    match n {
        0 => return Vec::new(),
        1 => return vec![Tree { n: 1, edges: Vec::new() }],
        _ => {}
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut out: Vec<Tree> = (0..total)
        .map(|mut code| {
            let seq: Vec<usize> = (0..len)
                .map(|_| {
                    let d = code % n;
                    code /= n;
                    d
                })
                .collect();
            Tree::from_edges(n, &prufer_decode(n, &seq)).0
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Trees on `0..n` with an index lookup.
pub struct TreeBasis {
    pub trees: Vec<Tree>,
    index: HashMap<Tree, usize>,
}

impl TreeBasis {
    pub fn index_of(&self, t: &Tree) -> usize {
        self.index[t]
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

/// Cached tree basis in arity `n`.
pub fn tree_basis(n: usize) -> Arc<TreeBasis> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<TreeBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().expect("tree cache").get(&n) {
        return b.clone();
    }
    let trees = enumerate_trees(n);
    let index = trees.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let b = Arc::new(TreeBasis { trees, index });
    cache.lock().expect("tree cache").insert(n, b.clone());
    b
}

/// A contractible graph on a labeled vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisGraph {
    pub vertices: FinSet,
    pub edges: Vec<(Atom, Atom)>,
}

impl BasisGraph {
    pub fn from_tree(vertices: &FinSet, t: &Tree) -> Self {
        BasisGraph {
            vertices: vertices.clone(),
            edges: t
                .edges
                .iter()
                .map(|&(a, b)| (vertices.get(a).clone(), vertices.get(b).clone()))
                .collect(),
        }
    }

    pub fn to_tree(&self) -> Result<Tree> {
        let idx = |a: &Atom| {
            self.vertices
                .index_of(a)
                .ok_or_else(|| Error::arg(format!("{a} is not a vertex")))
        };
        let edges = self
            .edges
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>>>()?;
        if !Tree::is_tree(self.vertices.len(), &edges) {
            return Err(Error::arg(format!("{self} is not a tree")));
        }
        Ok(Tree::from_edges(self.vertices.len(), &edges).0)
    }
}

fn write_graph(f: &mut fmt::Formatter<'_>, vertices: &FinSet, edges: &[(Atom, Atom)], sep: char) -> fmt::Result {
    let vs: Vec<String> = vertices.atoms().iter().map(Atom::to_string).collect();
    write!(f, "{};", vs.join(" "))?;
    for (a, b) in edges {
        write!(f, " {a}{sep}{b}")?;
    }
    Ok(())
}

fn parse_graph(s: &str, sep: char) -> Result<(FinSet, Vec<(Atom, Atom)>)> {
    let (vs, es) = s
        .split_once(';')
        .ok_or_else(|| Error::parse(format!("graph {s:?}"), "missing ';'"))?;
    let atoms = vs
        .split_whitespace()
        .map(Atom::parse)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::parse(format!("graph {s:?}"), e.to_string()))?;
    let n = atoms.len();
    let vertices = FinSet::new(atoms).map_err(|e| Error::parse(format!("graph {s:?}"), e.to_string()))?;
    if vertices.len() != n {
        return Err(Error::parse(format!("graph {s:?}"), "repeated vertex"));
    }
    let mut edges = Vec::new();
    for e in es.split_whitespace() {
        let (a, b) = e
            .split_once(sep)
            .ok_or_else(|| Error::parse(format!("edge {e:?}"), format!("expected a{sep}b")))?;
        let a = Atom::parse(a).map_err(|x| Error::parse(format!("edge {e:?}"), x.to_string()))?;
        let b = Atom::parse(b).map_err(|x| Error::parse(format!("edge {e:?}"), x.to_string()))?;
        edges.push((a, b));
    }
    Ok((vertices, edges))
}

impl fmt::Display for BasisGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_graph(f, &self.vertices, &self.edges, '-')
    }
}

impl FromStr for BasisGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (vertices, edges) = parse_graph(s, '-')?;
        let g = BasisGraph { vertices, edges };
        g.to_tree()?;
        Ok(g)
    }
}

/// A tree with oriented edges and a sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirBasisGraph {
    pub vertices: FinSet,
    pub edges: Vec<(Atom, Atom)>,
    pub sign: i64,
}

impl DirBasisGraph {
    /// Orients every edge from the smaller to the larger atom, adjusting the
    /// sign once per reversal.
    pub fn canonical(&self) -> DirBasisGraph {
        let mut sign = self.sign;
        let mut edges: Vec<(Atom, Atom)> = self
            .edges
            .iter()
            .map(|(a, b)| {
                if a > b {
                    sign = -sign;
                    (b.clone(), a.clone())
                } else {
                    (a.clone(), b.clone())
                }
            })
            .collect();
        edges.sort();
        DirBasisGraph {
            vertices: self.vertices.clone(),
            edges,
            sign,
        }
    }

    /// The canonical tree and sign.
    pub fn to_tree(&self) -> Result<(Tree, i64)> {
        let idx = |a: &Atom| {
            self.vertices
                .index_of(a)
                .ok_or_else(|| Error::arg(format!("{a} is not a vertex")))
        };
        let edges = self
            .edges
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>>>()?;
        if !Tree::is_tree(self.vertices.len(), &edges) {
            return Err(Error::arg(format!("{self} is not a tree")));
        }
        let (t, flips) = Tree::from_edges(self.vertices.len(), &edges);
        Ok((t, if flips % 2 == 0 { self.sign } else { -self.sign }))
    }

    pub fn reverse_edge(&self, k: usize) -> DirBasisGraph {
        let mut g = self.clone();
        let (a, b) = g.edges[k].clone();
        g.edges[k] = (b, a);
        g
    }
}

impl fmt::Display for DirBasisGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign < 0 {
            write!(f, "-")?;
        }
        write_graph(f, &self.vertices, &self.edges, '>')
    }
}

impl FromStr for DirBasisGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (sign, rest) = match s.strip_prefix('-') {
            Some(r) => (-1, r),
            None => (1, s),
        };
        let (vertices, edges) = parse_graph(rest, '>')?;
        let g = DirBasisGraph { vertices, edges, sign };
        g.to_tree()?;
        Ok(g)
    }
}

/// Result of contracting a tree along a map: the quotient tree on the target
/// and one tree per fiber (in fiber-local indices), with the orientation
/// sign picked up when the tree is read as a directed graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub quotient: Tree,
    pub blocks: Vec<Tree>,
    pub sign: i64,
}

/// Contracts an oriented edge list on `0..f.len()` along `f: S → 0..t_len`.
/// Absent when some fiber does not span a tree (including empty fibers).
pub fn contract_edges(edges: &[(usize, usize)], f: &[usize], t_len: usize) -> Option<Contraction> {
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); t_len];
    let mut local = vec![0; f.len()];
    for (s, &t) in f.iter().enumerate() {
        local[s] = fibers[t].len();
        fibers[t].push(s);
    }
    let mut block_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); t_len];
    let mut quotient_edges = Vec::new();
    for &(a, b) in edges {
        if f[a] == f[b] {
            block_edges[f[a]].push((local[a], local[b]));
        } else {
            quotient_edges.push((f[a], f[b]));
        }
    }
    let mut flips = 0;
    let mut blocks = Vec::with_capacity(t_len);
    for (fib, be) in fibers.iter().zip(&block_edges) {
        if !Tree::is_tree(fib.len(), be) {
            return None;
        }
        let (t, fl) = Tree::from_edges(fib.len(), be);
        flips += fl;
        blocks.push(t);
    }
    debug_assert!(Tree::is_tree(t_len, &quotient_edges));
    let (quotient, fl) = Tree::from_edges(t_len, &quotient_edges);
    flips += fl;
    Some(Contraction {
        quotient,
        blocks,
        sign: if flips % 2 == 0 { 1 } else { -1 },
    })
}

/// Contraction of a labeled graph along a set map, in labeled form.
pub fn contract(g: &BasisGraph, f: &crate::wreath::SetMap) -> Result<Option<(BasisGraph, Vec<BasisGraph>)>> {
    if f.dom != g.vertices {
        return Err(Error::arg("the map's domain is not the vertex set"));
    }
    let t = g.to_tree()?;
    Ok(contract_edges(&t.edges, &f.assignment, f.cod.len()).map(|c| {
        let blocks = (0..f.cod.len())
            .map(|k| {
                let fiber = FinSet::new(f.fiber(k).into_iter().map(|s| f.dom.get(s).clone()).collect())
                    .expect("distinct atoms");
                BasisGraph::from_tree(&fiber, &c.blocks[k])
            })
            .collect();
        (BasisGraph::from_tree(&f.cod, &c.quotient), blocks)
    }))
}

/// Deliberate defects for negative controls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Corruption {
    /// Negates the output at one labeled 2-chain.
    SignFlip { chain: Chain, column: usize },
    /// Sends non-contractions to star graphs instead of zero.
    DroppedZeroCase,
    /// Counit multiplied by 2.
    WrongCounit,
}

/// The graph cooperad (or its directed variant) truncated to arities
/// `1..=max_arity`.
#[derive(Clone)]
pub struct GraphCooperad {
    pub max_arity: usize,
    pub directed: bool,
    pub corruption: Option<Corruption>,
    seq: Arc<SymSeq>,
}

/// The symmetric sequence of trees: relabeling vertices, with the
/// reorientation sign in the directed case.
pub fn graph_seq(max_arity: usize, directed: bool) -> SymSeq {
    SymSeq::from_fn(max_arity, |n| {
        if n == 0 {
            return None;
        }
        let basis = tree_basis(n);
        let names = basis
            .trees
            .iter()
            .map(|t| BasisGraph::from_tree(&FinSet::standard(n), t).to_string())
            .collect();
        let gens = (0..n - 1)
            .map(|k| {
                let swap = |v: usize| {
                    if v == k {
                        k + 1
                    } else if v == k + 1 {
                        k
                    } else {
                        v
                    }
                };
                SignedPerm {
                    images: basis
                        .trees
                        .iter()
                        .map(|t| {
                            let moved: Vec<(usize, usize)> = t.edges.iter().map(|&(a, b)| (swap(a), swap(b))).collect();
                            let (u, flips) = Tree::from_edges(n, &moved);
                            let sign = if directed && flips % 2 == 1 { -1 } else { 1 };
                            SignedImage {
                                to: basis.index_of(&u),
                                sign,
                            }
                        })
                        .collect(),
                }
            })
            .collect();
        Some((names, gens))
    })
    .expect("valid tree sequence")
}

impl GraphCooperad {
    pub fn new(max_arity: usize, directed: bool) -> Self {
        GraphCooperad {
            max_arity,
            directed,
            corruption: None,
            seq: Arc::new(graph_seq(max_arity, directed)),
        }
    }

    pub fn corrupted(mut self, c: Corruption) -> Self {
        self.corruption = Some(c);
        self
    }

    pub fn symseq(&self) -> Arc<SymSeq> {
        self.seq.clone()
    }

    fn rank(&self, n: usize) -> usize {
        if n == 0 || n > self.max_arity {
            0
        } else {
            tree_basis(n).len()
        }
    }

    /// Row index of `quotient ⊗ blocks`, or `None` if any factor is zero.
    fn row(&self, quotient: &Tree, blocks: &[Tree]) -> Option<usize> {
        let mut idx = 0;
        for t in std::iter::once(quotient).chain(blocks) {
            let r = self.rank(t.n);
            if r == 0 {
                return None;
            }
            idx = idx * r + tree_basis(t.n).index_of(t);
        }
        Some(idx)
    }

    fn star(n: usize) -> Tree {
        Tree::from_edges(n, &(1..n).map(|v| (0, v)).collect::<Vec<_>>()).0
    }

    /// `Δ̃` applied to one oriented edge list on `S`: the output column as
    /// `(row, coefficient)` pairs.
    pub fn apply(&self, edges: &[(usize, usize)], f: &[usize], t_len: usize) -> Vec<(usize, i64)> {
        match contract_edges(edges, f, t_len) {
            Some(c) => {
                let sign = if self.directed { c.sign } else { 1 };
                self.row(&c.quotient, &c.blocks).map(|r| (r, sign)).into_iter().collect()
            }
            None if self.corruption == Some(Corruption::DroppedZeroCase) => {
                let mut sizes = vec![0; t_len];
                for &t in f {
                    sizes[t] += 1;
                }
                if sizes.contains(&0) {
                    return Vec::new();
                }
                let blocks: Vec<Tree> = sizes.iter().map(|&k| Self::star(k)).collect();
                self.row(&Self::star(t_len), &blocks).map(|r| (r, 1)).into_iter().collect()
            }
            None => Vec::new(),
        }
    }
}

impl Cooperad for GraphCooperad {
    fn name(&self) -> String {
        let base = if self.directed { "directed graph" } else { "graph" };
        match &self.corruption {
            None => base.to_string(),
            Some(Corruption::SignFlip { .. }) => format!("{base} (sign flip)"),
            Some(Corruption::DroppedZeroCase) => format!("{base} (dropped zero case)"),
            Some(Corruption::WrongCounit) => format!("{base} (counit 2)"),
        }
    }

    fn seq(&self) -> Functor {
        self.seq.clone()
    }

    fn cocomp(&self, c: &Chain) -> Result<Matrix> {
        if c.len() != 2 {
            return Err(Error::arg(format!("{c} is not a 2-chain")));
        }
        let t_len = c.level(0).len();
        let s_len = c.level(1).len();
        let f = &c.maps()[0];
        let mut rows = self.rank(t_len);
        for k in 0..t_len {
            rows *= self.rank(f.iter().filter(|&&x| x == k).count());
        }
        let cols = self.rank(s_len);
        let mut m = Matrix::zeros(rows, cols);
        if rows == 0 || cols == 0 {
            return Ok(m);
        }
        for (j, t) in tree_basis(s_len).trees.iter().enumerate() {
            for (r, v) in self.apply(&t.edges, f, t_len) {
                m.add_to(r, j, v);
            }
        }
        if let Some(Corruption::SignFlip { chain, column }) = &self.corruption {
            if chain == c && *column < cols {
                for r in 0..rows {
                    m.set(r, *column, -m.get(r, *column));
                }
            }
        }
        Ok(m)
    }

    fn counit(&self) -> Matrix {
        let v = if self.corruption == Some(Corruption::WrongCounit) { 2 } else { 1 };
        Matrix::from_rows(&[vec![v]], 1)
    }
}

/// Brute-force count of spanning trees of the complete graph on `n`
/// vertices, over all edge subsets.
pub fn brute_force_tree_count(n: usize) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    (0u64..1 << pairs.len())
        .filter(|mask| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            Tree::is_tree(n, &edges)
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wreath::SetMap;

    fn atoms(s: &str) -> FinSet {
        FinSet::new(s.split(',').map(|a| Atom::parse(a).unwrap()).collect()).unwrap()
    }

    #[test]
    fn tree_counts() {
        assert_eq!(enumerate_trees(1).len(), 1);
        assert_eq!(enumerate_trees(2).len(), 1);
        assert_eq!(enumerate_trees(3).len(), 3);
        assert_eq!(enumerate_trees(4).len(), 16);
        for n in 2..=4 {
            assert_eq!(brute_force_tree_count(n), enumerate_trees(n).len());
        }
    }

    #[test]
    fn path_contractions() {
        let s = atoms("a,b,c");
        let xy = atoms("x,y");
        let g: BasisGraph = "a b c; a-b b-c".parse().unwrap();
        let f = SetMap::new(s.clone(), xy.clone(), vec![0, 0, 1]).unwrap();
        let (q, blocks) = contract(&g, &f).unwrap().unwrap();
        assert_eq!(q.to_string(), "x y; x-y");
        assert_eq!(blocks[0].to_string(), "a b; a-b");
        assert_eq!(blocks[1].to_string(), "c;");
        let f = SetMap::new(s.clone(), xy, vec![0, 1, 0]).unwrap();
        assert!(contract(&g, &f).unwrap().is_none());
        let id = SetMap::new(s.clone(), s, vec![0, 1, 2]).unwrap();
        let (q, blocks) = contract(&g, &id).unwrap().unwrap();
        assert_eq!(q, g);
        assert!(blocks.iter().all(|b| b.edges.is_empty()));
    }

    #[test]
    fn directed_canonical_form() {
        let g: DirBasisGraph = "a b; b>a".parse().unwrap();
        let c = g.canonical();
        assert_eq!(c.to_string(), "-a b; a>b");
        assert_eq!(c.canonical(), c);
    }

    #[test]
    fn cocomp_example() {
        let gr = GraphCooperad::new(4, false);
        let c: Chain = "[x,y | a>x,b>x,c>y]".parse().unwrap();
        let m = gr.cocomp(&c).unwrap();
        // Trees on {a,b,c}: a-b a-c, a-b b-c, a-c b-c.
        assert_eq!(m.column_nonzeros(0), vec![(0, 1)]);
        assert_eq!(m.column_nonzeros(1), vec![(0, 1)]);
        assert!(m.column_nonzeros(2).is_empty());
        let c: Chain = "[x | a>x,b>x,c>x]".parse().unwrap();
        assert!(gr.cocomp(&c).unwrap().is_identity());
    }
}
