//! The cooperad of contractible Δ-complexes, restricted to dimension ≤ 2 and
//! to cells with distinct vertices.
//!
//! A complex on `0..n` has edges given by vertex pairs `(a, b)` with `a < b`
//! (parallel edges allowed) and triangles given by their edges
//! `[e01, e02, e12]` over vertices `v0 < v1 < v2`. Contractibility is
//! certified by greedy collapsing.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::compose::Functor;
use crate::cooperad::Cooperad;
use crate::error::{Error, Result};
use rayon::prelude::*;
use crate::report::Report;
use crate::graphco::Tree;
use crate::symseq::{SymFunctor, SymSeq};
use crate::wreath::{enumerate_iso_classes, permutations, Atom, Chain, FinSet};
use crate::zmodule::{smith_invariants, Matrix, SignedImage, SignedPerm};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Complex {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub triangles: Vec<[usize; 3]>,
}

impl Complex {
    pub fn point() -> Self {
        Complex {
            n: 1,
            edges: Vec::new(),
            triangles: Vec::new(),
        }
    }

    pub fn from_tree(t: &Tree) -> Self {
        Complex {
            n: t.n,
            edges: t.edges.clone(),
            triangles: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        if !self.triangles.is_empty() {
            2
        } else if !self.edges.is_empty() {
            1
        } else {
            0
        }
    }

    /// Vertices of a triangle in ascending order.
    pub fn triangle_vertices(&self, t: &[usize; 3]) -> [usize; 3] {
        let (v0, v1) = self.edges[t[0]];
        [v0, v1, self.edges[t[2]].1]
    }

    /// Checks vertex bounds, edge orientation and triangle boundaries.
    pub fn validate(&self) -> Result<()> {
        for &(a, b) in &self.edges {
            if a >= b || b >= self.n {
                return Err(Error::arg(format!("edge ({a},{b}) is not an ascending pair of vertices")));
            }
        }
        for t in &self.triangles {
            if t.iter().any(|&e| e >= self.edges.len()) {
                return Err(Error::arg("triangle refers to a missing edge"));
            }
            let (a, b) = self.edges[t[0]];
            let (c, d) = self.edges[t[1]];
            let (e, f) = self.edges[t[2]];
            if !(a == c && b == e && d == f) {
                return Err(Error::arg(format!("triangle {t:?} has an incompatible boundary")));
            }
        }
        Ok(())
    }

    /// Canonical representative under renumbering of parallel edges.
    pub fn canonical(&self) -> Complex {
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by_key(|&e| self.edges[e]);
        let edges: Vec<(usize, usize)> = order.iter().map(|&e| self.edges[e]).collect();
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=edges.len() {
            if i == edges.len() || edges[i] != edges[start] {
                groups.push((start, i));
                start = i;
            }
        }
        let mut best: Option<Vec<[usize; 3]>> = None;
        let mut slot = order.clone();
        let perms: Vec<Vec<Vec<usize>>> = groups
            .iter()
            .map(|&(s, e)| permutations(e - s))
            .collect();
        let mut idx = vec![0; groups.len()];
        loop {
            for (g, &(s, _)) in groups.iter().enumerate() {
                for (k, &p) in perms[g][idx[g]].iter().enumerate() {
                    slot[s + k] = order[s + p];
                }
            }
            let mut new_id = vec![0; self.edges.len()];
            for (pos, &old) in slot.iter().enumerate() {
                new_id[old] = pos;
            }
            let mut tris: Vec<[usize; 3]> = self
                .triangles
                .iter()
                .map(|t| [new_id[t[0]], new_id[t[1]], new_id[t[2]]])
                .collect();
            tris.sort_unstable();
            if best.as_ref().is_none_or(|b| tris < *b) {
                best = Some(tris);
            }
            let mut g = 0;
            while g < groups.len() {
                idx[g] += 1;
                if idx[g] < perms[g].len() {
                    break;
                }
                idx[g] = 0;
                g += 1;
            }
            if g == groups.len() {
                break;
            }
        }
        Complex {
            n: self.n,
            edges,
            triangles: best.unwrap_or_default(),
        }
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Complex {
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        let triangles = self
            .triangles
            .iter()
            .map(|t| self.reslot(t, &edges))
            .collect();
        Complex {
            n: self.n,
            edges,
            triangles,
        }
        .canonical()
    }

    /// Reorders the edges of a triangle after its vertices were relabeled.
    fn reslot(&self, t: &[usize; 3], new_edges: &[(usize, usize)]) -> [usize; 3] {
        let mut vs: Vec<usize> = t.iter().flat_map(|&e| [new_edges[e].0, new_edges[e].1]).collect();
        vs.sort_unstable();
        vs.dedup();
        let find = |a: usize, b: usize| *t.iter().find(|&&e| new_edges[e] == (a, b)).expect("edge of triangle");
        [find(vs[0], vs[1]), find(vs[0], vs[2]), find(vs[1], vs[2])]
    }
}

/// Reduced integral homology in degrees 0, 1, 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedHomology {
    pub betti: [usize; 3],
    pub torsion: [Vec<i64>; 3],
}

impl ReducedHomology {
    pub fn vanishes(&self) -> bool {
        self.betti == [0; 3] && self.torsion.iter().all(Vec::is_empty)
    }
}

pub fn reduced_homology(x: &Complex) -> ReducedHomology {
    let (v, e, f) = (x.n, x.edges.len(), x.triangles.len());
    let mut d1 = Matrix::zeros(v, e);
    for (k, &(a, b)) in x.edges.iter().enumerate() {
        d1.add_to(b, k, 1);
        d1.add_to(a, k, -1);
    }
    let mut d2 = Matrix::zeros(e, f);
    for (k, t) in x.triangles.iter().enumerate() {
        d2.add_to(t[2], k, 1);
        d2.add_to(t[1], k, -1);
        d2.add_to(t[0], k, 1);
    }
    let inv1 = smith_invariants(&d1);
    let inv2 = smith_invariants(&d2);
    let r_aug = usize::from(v > 0);
    let torsion = |inv: &[i64]| inv.iter().map(|x| x.abs()).filter(|&x| x > 1).collect::<Vec<_>>();
    ReducedHomology {
        betti: [v - r_aug - inv1.len(), e - inv1.len() - inv2.len(), f - inv2.len()],
        torsion: [torsion(&inv1), torsion(&inv2), Vec::new()],
    }
}

/// Greedy elementary collapses: triangles with a free edge, then edges with
/// a free vertex. True when a single vertex remains.
pub fn collapse_to_point(x: &Complex) -> bool {
    let mut tri_alive = vec![true; x.triangles.len()];
    let mut edge_alive = vec![true; x.edges.len()];
    loop {
        let mut uses = vec![0usize; x.edges.len()];
        let mut owner = vec![0usize; x.edges.len()];
        for (k, t) in x.triangles.iter().enumerate() {
            if tri_alive[k] {
                for &e in t {
                    uses[e] += 1;
                    owner[e] = k;
                }
            }
        }
        match (0..x.edges.len()).find(|&e| edge_alive[e] && uses[e] == 1) {
            Some(e) => {
                edge_alive[e] = false;
                tri_alive[owner[e]] = false;
            }
            None => break,
        }
    }
    if tri_alive.iter().any(|&a| a) {
        return false;
    }
    let mut vert_alive = vec![true; x.n];
    loop {
        let mut deg = vec![0usize; x.n];
        let mut owner = vec![0usize; x.n];
        for (k, &(a, b)) in x.edges.iter().enumerate() {
            if edge_alive[k] {
                deg[a] += 1;
                deg[b] += 1;
                owner[a] = k;
                owner[b] = k;
            }
        }
        match (0..x.n).find(|&v| vert_alive[v] && deg[v] == 1) {
            Some(v) => {
                vert_alive[v] = false;
                edge_alive[owner[v]] = false;
            }
            None => break,
        }
    }
    !edge_alive.iter().any(|&a| a) && vert_alive.iter().filter(|&&a| a).count() == 1
}

/// Outcome of the contractibility test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Contractibility {
    Collapsible,
    /// Nonvanishing reduced homology.
    NotContractible,
    /// Homology vanishes but greedy collapsing got stuck.
    Indeterminate,
}

pub fn contractibility(x: &Complex) -> Contractibility {
    if x.n > 0 && collapse_to_point(x) {
        Contractibility::Collapsible
    } else if x.n == 0 || !reduced_homology(x).vanishes() {
        Contractibility::NotContractible
    } else {
        Contractibility::Indeterminate
    }
}

pub fn collapsible(x: &Complex) -> bool {
    contractibility(x) == Contractibility::Collapsible
}

/// Result of contracting a complex along a set map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractOutcome {
    Contraction { quotient: Complex, blocks: Vec<Complex> },
    /// Some block closure is not certified contractible.
    Absent,
    /// Blocks are contractible but a cell meets a block in more than one
    /// vertex, so the quotient leaves the Δ-complex world.
    QuotientNotDelta,
}

/// The maximal subcomplex on the vertices `fiber` (ascending), relabeled
/// `0..fiber.len()`.
pub fn closure(x: &Complex, fiber: &[usize]) -> Complex {
    let local: HashMap<usize, usize> = fiber.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edge_id = HashMap::new();
    let mut edges = Vec::new();
    for (k, &(a, b)) in x.edges.iter().enumerate() {
        if let (Some(&la), Some(&lb)) = (local.get(&a), local.get(&b)) {
            edge_id.insert(k, edges.len());
            edges.push((la, lb));
        }
    }
    let triangles = x
        .triangles
        .iter()
        .filter(|t| t.iter().all(|e| edge_id.contains_key(e)))
        .map(|t| [edge_id[&t[0]], edge_id[&t[1]], edge_id[&t[2]]])
        .collect();
    Complex {
        n: fiber.len(),
        edges,
        triangles,
    }
    .canonical()
}

pub fn contract_complex(x: &Complex, f: &[usize], t_len: usize) -> ContractOutcome {
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); t_len];
    for (v, &t) in f.iter().enumerate() {
        fibers[t].push(v);
    }
    let blocks: Vec<Complex> = fibers.iter().map(|fib| closure(x, fib)).collect();
    if !blocks.iter().all(collapsible) {
        return ContractOutcome::Absent;
    }
    let mut edge_id = HashMap::new();
    let mut edges = Vec::new();
    for (k, &(a, b)) in x.edges.iter().enumerate() {
        if f[a] != f[b] {
            edge_id.insert(k, edges.len());
            edges.push((f[a].min(f[b]), f[a].max(f[b])));
        }
    }
    let mut quotient = Complex {
        n: t_len,
        edges,
        triangles: Vec::new(),
    };
    for t in &x.triangles {
        let vs = x.triangle_vertices(t);
        let images: BTreeSet<usize> = vs.iter().map(|&v| f[v]).collect();
        match images.len() {
            1 => {}
            3 => {
                let ids = [edge_id[&t[0]], edge_id[&t[1]], edge_id[&t[2]]];
                let q = Complex::reslot_into(&ids, &quotient.edges);
                quotient.triangles.push(q);
            }
            _ => return ContractOutcome::QuotientNotDelta,
        }
    }
    ContractOutcome::Contraction {
        quotient: quotient.canonical(),
        blocks,
    }
}

impl Complex {
    fn reslot_into(ids: &[usize; 3], edges: &[(usize, usize)]) -> [usize; 3] {
        let mut vs: Vec<usize> = ids.iter().flat_map(|&e| [edges[e].0, edges[e].1]).collect();
        vs.sort_unstable();
        vs.dedup();
        let find = |a: usize, b: usize| *ids.iter().find(|&&e| edges[e] == (a, b)).expect("edge of triangle");
        [find(vs[0], vs[1]), find(vs[0], vs[2]), find(vs[1], vs[2])]
    }
}

/// All admitted basis complexes on `0..n` with at most `max_tri` triangles,
/// in canonical order, and the complexes whose homology vanishes but which
/// could not be collapsed.
pub fn enumerate_complexes(n: usize, max_tri: usize) -> (Vec<Complex>, Vec<Complex>) {
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut admitted = BTreeSet::new();
    let mut indeterminate = BTreeSet::new();
    for f in 0..=max_tri {
        let e = n - 1 + f;
        for edges in multisets(pairs.len(), e) {
            let edges: Vec<(usize, usize)> = edges.iter().map(|&p| pairs[p]).collect();
            let mut slots: Vec<[usize; 3]> = Vec::new();
            for a in 0..edges.len() {
                for b in 0..edges.len() {
                    for c in 0..edges.len() {
                        let (x0, x1) = edges[a];
                        let (y0, y1) = edges[b];
                        let (z0, z1) = edges[c];
                        if x0 == y0 && x1 == z0 && y1 == z1 {
                            slots.push([a, b, c]);
                        }
                    }
                }
            }
            for tris in multisets(slots.len(), f) {
                let x = Complex {
                    n,
                    edges: edges.clone(),
                    triangles: tris.iter().map(|&s| slots[s]).collect(),
                }
                .canonical();
                match contractibility(&x) {
                    Contractibility::Collapsible => {
                        admitted.insert(x);
                    }
                    Contractibility::Indeterminate => {
                        indeterminate.insert(x);
                    }
                    Contractibility::NotContractible => {}
                }
            }
        }
    }
    (admitted.into_iter().collect(), indeterminate.into_iter().collect())
}

/// Nondecreasing sequences of length `k` from `0..m`.
fn multisets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(m: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in from..m {
            cur.push(x);
            rec(m, k, x, cur, out);
            cur.pop();
        }
    }
    rec(m, k, 0, &mut cur, &mut out);
    out
}

pub struct ComplexBasis {
    pub complexes: Vec<Complex>,
    pub indeterminate: Vec<Complex>,
    index: HashMap<Complex, usize>,
}

impl ComplexBasis {
    pub fn index_of(&self, x: &Complex) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn len(&self) -> usize {
        self.complexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complexes.is_empty()
    }
}

pub fn complex_basis(n: usize, max_tri: usize) -> Arc<ComplexBasis> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<ComplexBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().expect("complex cache").get(&(n, max_tri)) {
        return b.clone();
    }
    let (complexes, indeterminate) = enumerate_complexes(n, max_tri);
    let index = complexes.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
    let b = Arc::new(ComplexBasis {
        complexes,
        indeterminate,
        index,
    });
    cache.lock().expect("complex cache").insert((n, max_tri), b.clone());
    b
}

/// A complex with labeled vertices, in the JSON cell-list encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledComplex {
    pub vertices: Vec<String>,
    pub edges: Vec<(usize, String, String)>,
    pub triangles: Vec<(usize, usize, usize, usize)>,
}

impl LabeledComplex {
    pub fn new(vertices: &FinSet, x: &Complex) -> Self {
        let name = |v: usize| vertices.get(v).to_string();
        LabeledComplex {
            vertices: vertices.atoms().iter().map(Atom::to_string).collect(),
            edges: x
                .edges
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| (k, name(a), name(b)))
                .collect(),
            triangles: x
                .triangles
                .iter()
                .enumerate()
                .map(|(k, t)| (k, t[0], t[1], t[2]))
                .collect(),
        }
    }

    /// The vertex set and the complex on its indices.
    pub fn to_complex(&self) -> Result<(FinSet, Complex)> {
        let atoms = self.vertices.iter().map(|v| Atom::parse(v)).collect::<Result<Vec<_>>>()?;
        let n = atoms.len();
        let vs = FinSet::new(atoms)?;
        if vs.len() != n {
            return Err(Error::arg("repeated vertex"));
        }
        let mut edge_pos = HashMap::new();
        let mut edges = Vec::new();
        let mut flipped = Vec::new();
        for (id, a, b) in &self.edges {
            let ia = vs.index_of(&Atom::parse(a)?).ok_or_else(|| Error::arg(format!("{a} is not a vertex")))?;
            let ib = vs.index_of(&Atom::parse(b)?).ok_or_else(|| Error::arg(format!("{b} is not a vertex")))?;
            if ia == ib {
                return Err(Error::Unsupported(format!("edge {id} is a loop")));
            }
            edge_pos.insert(*id, edges.len());
            flipped.push(ia > ib);
            edges.push((ia.min(ib), ia.max(ib)));
        }
        let mut x = Complex {
            n,
            edges,
            triangles: Vec::new(),
        };
        for (id, e1, e2, e3) in &self.triangles {
            let ids = [e1, e2, e3]
                .iter()
                .map(|e| edge_pos.get(e).copied().ok_or_else(|| Error::arg(format!("triangle {id} uses unknown edge {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let mut vs: Vec<usize> = ids.iter().flat_map(|&e| [x.edges[e].0, x.edges[e].1]).collect();
            vs.sort_unstable();
            vs.dedup();
            if vs.len() != 3 {
                return Err(Error::Unsupported(format!("triangle {id} has repeated vertices")));
            }
            let find = |a: usize, b: usize| ids.iter().copied().find(|&e| x.edges[e] == (a, b));
            match (find(vs[0], vs[1]), find(vs[0], vs[2]), find(vs[1], vs[2])) {
                (Some(p), Some(q), Some(r)) => x.triangles.push([p, q, r]),
                _ => return Err(Error::arg(format!("triangle {id} has an incompatible boundary"))),
            }
        }
        x.validate()?;
        Ok((vs, x.canonical()))
    }
}

/// The truncated CDC cooperad: arities `1..=max_arity`, at most `max_tri`
/// triangles.
pub struct CdcCooperad {
    pub max_arity: usize,
    pub max_tri: usize,
    seq: Arc<SymSeq>,
}

pub fn cdc_seq(max_arity: usize, max_tri: usize) -> SymSeq {
    SymSeq::from_fn(max_arity, |n| {
        if n == 0 {
            return None;
        }
        let basis = complex_basis(n, max_tri);
        let names = basis
            .complexes
            .iter()
            .map(|x| serde_json::to_string(&LabeledComplex::new(&FinSet::standard(n), x)).expect("serializable"))
            .collect();
        let gens = (0..n - 1)
            .map(|k| {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.swap(k, k + 1);
                SignedPerm {
                    images: basis
                        .complexes
                        .iter()
                        .map(|x| SignedImage {
                            to: basis.index_of(&x.relabel(&perm)).expect("relabeling preserves admission"),
                            sign: 1,
                        })
                        .collect(),
                }
            })
            .collect();
        Some((names, gens))
    })
    .expect("valid complex sequence")
}

impl CdcCooperad {
    pub fn new(max_arity: usize, max_tri: usize) -> Self {
        CdcCooperad {
            max_arity,
            max_tri,
            seq: Arc::new(cdc_seq(max_arity, max_tri)),
        }
    }

    pub fn symseq(&self) -> Arc<SymSeq> {
        self.seq.clone()
    }

    pub fn rank(&self, n: usize) -> usize {
        if n == 0 || n > self.max_arity {
            0
        } else {
            complex_basis(n, self.max_tri).len()
        }
    }

    fn index(&self, x: &Complex) -> Option<usize> {
        if x.n == 0 || x.n > self.max_arity {
            return None;
        }
        complex_basis(x.n, self.max_tri).index_of(x)
    }

    /// Output of `Δ̃` on one complex: `Ok(None)` for zero, the row of
    /// `quotient ⊗ blocks` otherwise.
    pub fn apply(&self, x: &Complex, f: &[usize], t_len: usize) -> Result<Option<usize>> {
        match contract_complex(x, f, t_len) {
            ContractOutcome::Absent => Ok(None),
            ContractOutcome::QuotientNotDelta => Err(Error::structural(
                "CDC cocomposition",
                "a cell meets a block in more than one vertex; the quotient is not a Δ-complex",
            )),
            ContractOutcome::Contraction { quotient, blocks } => {
                let mut row = 0;
                for y in std::iter::once(&quotient).chain(&blocks) {
                    let r = self.rank(y.n);
                    if r == 0 {
                        return Ok(None);
                    }
                    let i = self.index(y).ok_or_else(|| {
                        Error::structural("CDC cocomposition", "a contraction produced a complex outside the basis")
                    })?;
                    row = row * r + i;
                }
                Ok(Some(row))
            }
        }
    }

    /// `Δ̃` at a 2-chain with one entry per column; failed columns carry
    /// their error.
    pub fn cocomp_columns(&self, c: &Chain) -> Result<(usize, Vec<Result<Option<usize>>>)> {
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
        if s_len == 0 || s_len > self.max_arity {
            return Ok((rows, Vec::new()));
        }
        let cols = complex_basis(s_len, self.max_tri)
            .complexes
            .iter()
            .map(|x| if rows == 0 { Ok(None) } else { self.apply(x, f, t_len) })
            .collect();
        Ok((rows, cols))
    }
}

impl Cooperad for CdcCooperad {
    fn name(&self) -> String {
        "cdc".into()
    }

    fn seq(&self) -> Functor {
        self.seq.clone()
    }

    fn cocomp(&self, c: &Chain) -> Result<Matrix> {
        let (rows, cols) = self.cocomp_columns(c)?;
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, col) in cols.into_iter().enumerate() {
            if let Some(r) = col.map_err(|e| match e {
                Error::Structural { context, witness } => Error::structural(format!("{context} at {c}, column {j}"), witness),
                e => e,
            })? {
                m.set(r, j, 1);
            }
        }
        Ok(m)
    }

    fn counit(&self) -> Matrix {
        Matrix::from_rows(&[vec![1]], 1)
    }
}

/// A labeled instance name for a column.
fn column_name(c: &Chain, x: &Complex) -> String {
    format!("{c} @ {}", serde_json::to_string(&LabeledComplex::new(c.top(), x)).expect("serializable"))
}

/// Contraction with the outcome turned into an optional tuple, or `Err` for a
/// quotient outside the Δ-complex world.
fn contract_or_skip(x: &Complex, f: &[usize], t_len: usize) -> std::result::Result<Option<(Complex, Vec<Complex>)>, ()> {
    match contract_complex(x, f, t_len) {
        ContractOutcome::Contraction { quotient, blocks } => Ok(Some((quotient, blocks))),
        ContractOutcome::Absent => Ok(None),
        ContractOutcome::QuotientNotDelta => Err(()),
    }
}

fn describe(v: &Option<Vec<Complex>>) -> String {
    match v {
        None => "0".into(),
        Some(cs) => cs
            .iter()
            .map(|x| format!("{:?}/{:?}", x.edges, x.triangles))
            .collect::<Vec<_>>()
            .join(" ⊗ "),
    }
}

/// Both iterated cocompositions of `x` along the 3-chain `c`, as flat
/// tensors ordered root, middle level, top level.
fn coassociativity_routes(c: &Chain, x: &Complex) -> std::result::Result<[Option<Vec<Complex>>; 2], ()> {
    let g = &c.maps()[0];
    let f = &c.maps()[1];
    let (n1, n2) = (c.level(0).len(), c.level(1).len());
    let gf: Vec<usize> = f.iter().map(|&s| g[s]).collect();
    // Split off the top level first, then the middle one.
    let first = contract_or_skip(x, f, n2)?.map(|(q, top)| (q, top));
    let lhs = match first {
        None => None,
        Some((q, top)) => contract_or_skip(&q, g, n1)?.map(|(root, mid)| {
            let mut out = vec![root];
            out.extend(mid);
            out.extend(top);
            out
        }),
    };
    // Split along the composite, then split each block.
    let rhs = match contract_or_skip(x, &gf, n1)? {
        None => None,
        Some((root, big)) => {
            let mut mid = Vec::with_capacity(n2);
            let mut top = vec![None; n2];
            let mut absent = false;
            for (t, b) in big.iter().enumerate() {
                let fib2: Vec<usize> = (0..n2).filter(|&s| g[s] == t).collect();
                let fib3: Vec<usize> = (0..f.len()).filter(|&v| gf[v] == t).collect();
                let local: Vec<usize> = fib3
                    .iter()
                    .map(|&v| fib2.iter().position(|&s| s == f[v]).expect("fiber"))
                    .collect();
                match contract_or_skip(b, &local, fib2.len())? {
                    None => absent = true,
                    Some((q, bs)) => {
                        mid.push(q);
                        for (k, blk) in bs.into_iter().enumerate() {
                            top[fib2[k]] = Some(blk);
                        }
                    }
                }
            }
            if absent {
                None
            } else {
                let mut out = vec![root];
                out.extend(mid);
                out.extend(top.into_iter().map(|b| b.expect("every middle element lies in a fiber")));
                Some(out)
            }
        }
    };
    Ok([lhs, rhs])
}

fn naturality_outcome(c: &Chain, x: &Complex, sigma: &[usize], tau: &[usize]) -> std::result::Result<std::result::Result<(), String>, ()> {
    let f = &c.maps()[0];
    let t_len = c.level(0).len();
    let s_inv = crate::wreath::invert(sigma);
    let f2: Vec<usize> = (0..f.len()).map(|v| tau[f[s_inv[v]]]).collect();
    let base = contract_or_skip(x, f, t_len)?;
    let moved = contract_or_skip(&x.relabel(sigma), &f2, t_len)?;
    let expected = base.map(|(q, blocks)| {
        let mut out = vec![Complex::default(); t_len];
        for (t, b) in blocks.into_iter().enumerate() {
            let old: Vec<usize> = (0..f.len()).filter(|&v| f[v] == t).collect();
            let mut new: Vec<usize> = old.iter().map(|&v| sigma[v]).collect();
            new.sort_unstable();
            let local: Vec<usize> = old
                .iter()
                .map(|&v| new.iter().position(|&w| w == sigma[v]).expect("image"))
                .collect();
            out[tau[t]] = b.relabel(&local);
        }
        (q.relabel(tau), out)
    });
    Ok(if expected == moved {
        Ok(())
    } else {
        Err(format!(
            "along ({sigma:?}, {tau:?}): {} vs {}",
            describe(&expected.map(|(q, b)| std::iter::once(q).chain(b).collect())),
            describe(&moved.map(|(q, b)| std::iter::once(q).chain(b).collect()))
        ))
    })
}

/// Coassociativity, both counit laws and naturality of the CDC
/// cocomposition, column by column. Columns whose cocomposition leaves the
/// Δ-complex world are skipped with a reason. Also checks that every
/// admitted basis complex has vanishing reduced homology.
pub fn verify_cdc(max_set: usize, max_tri: usize) -> Report {
    let mut report = Report::new();
    const NOT_DELTA: &str = "a cell meets a block in more than one vertex";
    for n in 1..=max_set {
        let basis = complex_basis(n, max_tri);
        for x in &basis.complexes {
            let h = reduced_homology(x);
            let outcome = if h.vanishes() { Ok(()) } else { Err(format!("{h:?}")) };
            report.record("cdc.homology", column_name(&Chain::single(FinSet::standard(n)), x), outcome);
        }
        for x in &basis.indeterminate {
            report.skip(
                "cdc.homology",
                column_name(&Chain::single(FinSet::standard(n)), x),
                "acyclic but not collapsible by greedy collapse; excluded from the basis",
            );
        }
        let id: Vec<usize> = (0..n).collect();
        for x in &basis.complexes {
            let name = column_name(&Chain::single(FinSet::standard(n)), x);
            let left = contract_complex(x, &vec![0; n], 1);
            let right = contract_complex(x, &id, n);
            let want_left = ContractOutcome::Contraction {
                quotient: Complex::point(),
                blocks: vec![x.clone()],
            };
            let want_right = ContractOutcome::Contraction {
                quotient: x.clone(),
                blocks: vec![Complex::point(); n],
            };
            let cmp = |got: ContractOutcome, want: ContractOutcome| {
                if got == want {
                    Ok(())
                } else {
                    Err(format!("{got:?}"))
                }
            };
            report.record("counit.left", &name, cmp(left, want_left));
            report.record("counit.right", &name, cmp(right, want_right));
        }
    }
    let chains3 = enumerate_iso_classes(3, max_set, max_set);
    let parts: Vec<Report> = chains3
        .par_iter()
        .map(|c| {
            let mut r = Report::new();
            let n = c.top().len();
            if n == 0 {
                return r;
            }
            for x in &complex_basis(n, max_tri).complexes {
                let name = column_name(c, x);
                match coassociativity_routes(c, x) {
                    Err(()) => r.skip("coassociativity", name, NOT_DELTA),
                    Ok([a, b]) if a == b => r.pass("coassociativity", name),
                    Ok([a, b]) => r.fail("coassociativity", name, format!("{} vs {}", describe(&a), describe(&b))),
                }
            }
            r
        })
        .collect();
    for p in parts {
        report.extend(p);
    }
    let chains2 = enumerate_iso_classes(2, max_set, max_set);
    let parts: Vec<Report> = chains2
        .par_iter()
        .map(|c| {
            let mut r = Report::new();
            let n = c.top().len();
            if n == 0 {
                return r;
            }
            for x in &complex_basis(n, max_tri).complexes {
                let name = column_name(c, x);
                let mut outcome = Ok(Ok(()));
                'outer: for sigma in permutations(n) {
                    for tau in permutations(c.level(0).len()) {
                        match naturality_outcome(c, x, &sigma, &tau) {
                            Ok(Ok(())) => {}
                            other => {
                                outcome = other;
                                break 'outer;
                            }
                        }
                    }
                }
                match outcome {
                    Err(()) => r.skip("naturality", name, NOT_DELTA),
                    Ok(o) => r.record("naturality", name, o),
                }
            }
            r
        })
        .collect();
    for p in parts {
        report.extend(p);
    }
    report
}

/// Compares the 1-dimensional fragment of the CDC cooperad with the graph
/// cooperad on all 2-chains with `|S| ≤ max_set`: equal bases and actions
/// with no triangles allowed, and, with triangles allowed, the same
/// contraction of every tree.
pub fn dim1_matches_graph(max_set: usize, max_tri: usize) -> Report {
    let mut report = Report::new();
    let gr = crate::graphco::GraphCooperad::new(max_set, false);
    let cdc0 = CdcCooperad::new(max_set, 0);
    for n in 1..=max_set {
        let trees = crate::graphco::enumerate_trees(n);
        let basis = complex_basis(n, 0);
        let same = trees.len() == basis.len()
            && trees.iter().zip(&basis.complexes).all(|(t, x)| Complex::from_tree(t) == *x);
        let outcome = if !same {
            Err("bases differ".to_string())
        } else {
            let mut o = Ok(());
            for p in permutations(n) {
                let a = gr.symseq().act(&p);
                let b = cdc0.symseq().act(&p);
                if a != b {
                    o = Err(format!("actions differ along {p:?}"));
                    break;
                }
            }
            o
        };
        report.record("cdc.dim1.basis", format!("|S| = {n}"), outcome);
    }
    for c in enumerate_iso_classes(2, max_set, max_set) {
        let outcome = (|| -> Result<std::result::Result<(), String>> {
            let a = gr.cocomp(&c)?;
            let b = cdc0.cocomp(&c)?;
            if a != b {
                return Ok(Err("cocomposition matrices differ".into()));
            }
            let f = &c.maps()[0];
            let t_len = c.level(0).len();
            for t in crate::graphco::enumerate_trees(c.top().len()) {
                let x = Complex::from_tree(&t);
                let want = crate::graphco::contract_edges(&t.edges, f, t_len).map(|k| {
                    (Complex::from_tree(&k.quotient), k.blocks.iter().map(Complex::from_tree).collect::<Vec<_>>())
                });
                let got = match contract_complex(&x, f, t_len) {
                    ContractOutcome::Contraction { quotient, blocks } => Some((quotient, blocks)),
                    ContractOutcome::Absent => None,
                    ContractOutcome::QuotientNotDelta => return Ok(Err("a tree produced a non-Δ quotient".into())),
                };
                if want != got {
                    return Ok(Err(format!("contraction of {:?} differs", t.edges)));
                }
                if got.is_some() && (max_tri > 0) {
                    let cdc = CdcCooperad::new(max_set, max_tri);
                    if cdc.apply(&x, f, t_len)?.is_none() {
                        return Ok(Err(format!("tree {:?} lost with triangles allowed", t.edges)));
                    }
                }
            }
            Ok(Ok(()))
        })();
        match outcome {
            Ok(o) => report.record("cdc.dim1.cocomp", &c, o),
            Err(e) => report.fail("cdc.dim1.cocomp", &c, e.to_string()),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Complex {
        Complex {
            n: 3,
            edges: vec![(0, 1), (0, 2), (1, 2)],
            triangles: vec![[0, 1, 2]],
        }
    }

    #[test]
    fn collapsibility_examples() {
        assert!(collapsible(&triangle()));
        let mut circle = triangle();
        circle.triangles.clear();
        assert_eq!(contractibility(&circle), Contractibility::NotContractible);
        assert_eq!(reduced_homology(&circle).betti, [0, 1, 0]);
        let mut sphere = triangle();
        sphere.triangles.push([0, 1, 2]);
        assert_eq!(contractibility(&sphere), Contractibility::NotContractible);
        assert_eq!(reduced_homology(&sphere).betti, [0, 0, 1]);
    }

    #[test]
    fn contraction_examples() {
        let x = triangle();
        assert_eq!(contract_complex(&x, &[0, 0, 1], 2), ContractOutcome::QuotientNotDelta);
        assert_eq!(
            contract_complex(&x, &[0, 1, 2], 3),
            ContractOutcome::Contraction {
                quotient: x.clone(),
                blocks: vec![Complex::point(); 3]
            }
        );
        assert_eq!(
            contract_complex(&x, &[0, 0, 0], 1),
            ContractOutcome::Contraction {
                quotient: Complex::point(),
                blocks: vec![x.clone()]
            }
        );
        // A triangle with one vertex per block keeps its 2-cell.
        let y = Complex {
            n: 4,
            edges: vec![(0, 1), (0, 2), (1, 2), (2, 3)],
            triangles: vec![[0, 1, 2]],
        };
        match contract_complex(&y, &[0, 1, 2, 2], 3) {
            ContractOutcome::Contraction { quotient, blocks } => {
                assert_eq!(quotient, x);
                assert_eq!(blocks[2].edges, vec![(0, 1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn one_dimensional_part_is_trees() {
        for n in 1..=4 {
            let (all, indeterminate) = enumerate_complexes(n, 0);
            assert!(indeterminate.is_empty());
            assert_eq!(all.len(), crate::graphco::enumerate_trees(n).len());
        }
    }

    #[test]
    fn labeled_round_trip() {
        let vs = FinSet::standard(3);
        let l = LabeledComplex::new(&vs, &triangle());
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"{"vertices":["1","2","3"],"edges":[[0,"1","2"],[1,"1","3"],[2,"2","3"]],"triangles":[[0,0,1,2]]}"#);
        let back: LabeledComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_complex().unwrap(), (vs, triangle()));
    }
}
