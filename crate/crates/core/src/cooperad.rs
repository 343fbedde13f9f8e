//! Cooperads, comodules and coalgebras; the coface and codegeneracy maps of
//! the cosimplicial tower `O^{∘̂•}` and the verification suites.
//!
//! A cocomposition is given on 2-chains `T ← S` as a matrix
//! `O(S) → O(T) ⊗ ⊗_{t∈T} O(f⁻¹(t))` whose rows follow the tensor-word
//! order of [`Chain::vertices`] (root first, first factor most significant).

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compose::{factor_ranks, iso_transport, kan_map, nonzero_classes, parenthesize, product, tensor_map, Block, Functor, KanFunctor, Shape};
use crate::error::{Error, Result};
use crate::report::Report;
use crate::symseq::{SymFunctor, SymSeq};
use crate::wreath::{enumerate_iso_classes, permutations, Chain, FinSet};
use crate::zmodule::{Matrix, SparseMatrix};

/// A symmetric sequence with cocomposition and counit.
pub trait Cooperad: Send + Sync {
    fn name(&self) -> String;

    fn seq(&self) -> Functor;

    /// `Δ̃` at a 2-chain.
    fn cocomp(&self, c: &Chain) -> Result<Matrix>;

    /// `O(1) → ℤ` as a `1 × rank O(1)` matrix.
    fn counit(&self) -> Matrix;
}

/// A left comodule over a cooperad.
pub trait Comodule: Send + Sync {
    fn name(&self) -> String;

    fn seq(&self) -> Functor;

    /// `M(S) → O(T) ⊗ ⊗_{t∈T} M(f⁻¹(t))` at a 2-chain `T ← S`.
    fn coaction(&self, c: &Chain) -> Result<Matrix>;
}

fn check_shape(m: &Matrix, rows: usize, cols: usize, what: &str, c: &Chain) -> Result<()> {
    if m.rows() != rows || m.cols() != cols {
        return Err(Error::structural(
            format!("{what} at {c}"),
            format!("matrix is {}x{}, expected {rows}x{cols}", m.rows(), m.cols()),
        ));
    }
    Ok(())
}

/// A natural transformation on 2-chains stored on canonical representatives
/// and extended to all chains by transport.
#[derive(Clone)]
pub struct NaturalTable {
    seqs: [Functor; 2],
    entries: BTreeMap<Chain, Matrix>,
}

impl NaturalTable {
    /// `root` is the sequence at the root vertex, `top` the one at the
    /// fibers and at the source.
    pub fn new(root: Functor, top: Functor) -> Self {
        NaturalTable {
            seqs: [root, top],
            entries: BTreeMap::new(),
        }
    }

    fn expected_shape(&self, c: &Chain) -> (usize, usize) {
        (
            product(&factor_ranks(&self.seqs, c)),
            self.seqs[1].rank(c.top().len()),
        )
    }

    /// Stores the value at `c`, transported to the canonical representative.
    pub fn insert(&mut self, c: &Chain, m: Matrix) -> Result<()> {
        if c.len() != 2 {
            return Err(Error::arg(format!("{c} is not a 2-chain")));
        }
        let (rows, cols) = self.expected_shape(c);
        check_shape(&m, rows, cols, "table entry", c)?;
        let (canon, phi) = c.canonical();
        let top_back = crate::wreath::invert(&phi.components[1]);
        let moved = iso_transport(&self.seqs, c, &canon, &phi)
            .mul(&m)
            .mul(&self.seqs[1].act(&top_back));
        if let Some(old) = self.entries.get(&canon) {
            if *old != moved {
                return Err(Error::arg(format!("conflicting entries for the class of {c}")));
            }
        }
        self.entries.insert(canon, moved);
        Ok(())
    }

    pub fn eval(&self, c: &Chain) -> Matrix {
        let (canon, phi) = c.canonical();
        let (rows, cols) = self.expected_shape(c);
        match self.entries.get(&canon) {
            None => Matrix::zeros(rows, cols),
            Some(m) => iso_transport(&self.seqs, &canon, c, &phi.inverse())
                .mul(m)
                .mul(&self.seqs[1].act(&phi.components[1])),
        }
    }

    pub fn entries(&self) -> &BTreeMap<Chain, Matrix> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut BTreeMap<Chain, Matrix> {
        &mut self.entries
    }
}

/// A cooperad given by a symmetric sequence and cocomposition tables.
#[derive(Clone)]
pub struct TableCooperad {
    pub name: String,
    pub seq: Arc<SymSeq>,
    pub table: NaturalTable,
    pub counit: Matrix,
}

#[derive(Serialize, Deserialize)]
struct CooperadFile {
    symseq: SymSeq,
    cocomp: BTreeMap<String, SparseMatrix>,
    counit: SparseMatrix,
}

impl TableCooperad {
    pub fn from_json(name: &str, text: &str) -> Result<Self> {
        let raw: CooperadFile = serde_json::from_str(text).map_err(|e| {
            Error::parse(format!("{name} line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        let seq = Arc::new(SymSeq::new(raw.symseq.max_arity(), raw.symseq.arities().clone())?);
        let mut table = NaturalTable::new(seq.clone(), seq.clone());
        for (key, m) in &raw.cocomp {
            let c: Chain = key
                .parse()
                .map_err(|e: Error| Error::parse(format!("{name} cocomp key {key:?}"), e.to_string()))?;
            let dense = m
                .to_dense()
                .map_err(|e| Error::parse(format!("{name} cocomp entry {key:?}"), e.to_string()))?;
            table
                .insert(&c, dense)
                .map_err(|e| Error::parse(format!("{name} cocomp entry {key:?}"), e.to_string()))?;
        }
        let counit = raw
            .counit
            .to_dense()
            .map_err(|e| Error::parse(format!("{name} counit"), e.to_string()))?;
        if counit.rows() != 1 || counit.cols() != seq.rank(1) {
            return Err(Error::parse(
                format!("{name} counit"),
                format!("expected a 1x{} matrix", seq.rank(1)),
            ));
        }
        Ok(TableCooperad {
            name: name.to_string(),
            seq,
            table,
            counit,
        })
    }

    pub fn to_json(&self) -> String {
        let file = CooperadFile {
            symseq: (*self.seq).clone(),
            cocomp: self
                .table
                .entries()
                .iter()
                .map(|(c, m)| (c.to_string(), m.to_sparse()))
                .collect(),
            counit: self.counit.to_sparse(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    /// Tabulates another cooperad on all 2-chains with levels of at most
    /// `max_set` elements.
    pub fn tabulate(op: &dyn Cooperad, seq: Arc<SymSeq>, max_set: usize) -> Result<Self> {
        let mut table = NaturalTable::new(seq.clone(), seq.clone());
        for c in enumerate_iso_classes(2, max_set, max_set) {
            let m = op.cocomp(&c)?;
            if !m.is_zero() {
                table.insert(&c, m)?;
            }
        }
        Ok(TableCooperad {
            name: op.name(),
            seq,
            table,
            counit: op.counit(),
        })
    }
}

impl Cooperad for TableCooperad {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn seq(&self) -> Functor {
        self.seq.clone()
    }

    fn cocomp(&self, c: &Chain) -> Result<Matrix> {
        if c.len() != 2 {
            return Err(Error::arg(format!("{c} is not a 2-chain")));
        }
        Ok(self.table.eval(c))
    }

    fn counit(&self) -> Matrix {
        self.counit.clone()
    }
}

/// The unit cooperad 𝟙.
pub struct UnitCooperad;

impl Cooperad for UnitCooperad {
    fn name(&self) -> String {
        "unit".into()
    }

    fn seq(&self) -> Functor {
        Arc::new(SymSeq::counit())
    }

    fn cocomp(&self, c: &Chain) -> Result<Matrix> {
        let seqs = [self.seq(), self.seq()];
        let rows = product(&factor_ranks(&seqs, c));
        let cols = seqs[0].rank(c.top().len());
        Ok(if rows == 1 && cols == 1 {
            Matrix::identity(1)
        } else {
            Matrix::zeros(rows, cols)
        })
    }

    fn counit(&self) -> Matrix {
        Matrix::identity(1)
    }
}

/// A coalgebra: a comodule concentrated in arity 0, given by its values on
/// the leafless 2-chains `T ← ∅`.
#[derive(Clone)]
pub struct Coalgebra {
    pub name: String,
    pub carrier: Arc<SymSeq>,
    pub table: NaturalTable,
}

impl Coalgebra {
    /// `entries[k]` is the coaction `c → O(k) ⊗ c^{⊗k}`.
    pub fn new(name: &str, op: &dyn Cooperad, carrier: Vec<String>, entries: &[(usize, Matrix)]) -> Result<Self> {
        let carrier = Arc::new(SymSeq::concentrated_in_zero(carrier));
        let mut table = NaturalTable::new(op.seq(), carrier.clone());
        for (k, m) in entries {
            let c = Chain::new(vec![FinSet::standard(*k), FinSet::empty()], vec![Vec::new()])?;
            table.insert(&c, m.clone())?;
        }
        Ok(Coalgebra {
            name: name.to_string(),
            carrier,
            table,
        })
    }
}

impl Comodule for Coalgebra {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn seq(&self) -> Functor {
        self.carrier.clone()
    }

    fn coaction(&self, c: &Chain) -> Result<Matrix> {
        if c.len() != 2 {
            return Err(Error::arg(format!("{c} is not a 2-chain")));
        }
        Ok(self.table.eval(c))
    }
}

/// A cooperad acting on itself.
pub struct Regular(pub Arc<dyn Cooperad>);

impl Comodule for Regular {
    fn name(&self) -> String {
        format!("{} (regular)", self.0.name())
    }

    fn seq(&self) -> Functor {
        self.0.seq()
    }

    fn coaction(&self, c: &Chain) -> Result<Matrix> {
        self.0.cocomp(c)
    }
}

/// The cosimplicial tower: `power(n) = O^{∘̂n}`, or `O^{∘̂(n−1)}∘̂M` for a
/// comodule `M`.
pub struct Tower {
    op: Arc<dyn Cooperad>,
    module: Option<Arc<dyn Comodule>>,
    powers: Mutex<BTreeMap<usize, Arc<KanFunctor>>>,
    maps: Mutex<HashMap<(char, usize, usize, usize), Arc<Matrix>>>,
}

impl Tower {
    pub fn new(op: Arc<dyn Cooperad>) -> Self {
        Tower {
            op,
            module: None,
            powers: Mutex::new(BTreeMap::new()),
            maps: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_module(op: Arc<dyn Cooperad>, module: Arc<dyn Comodule>) -> Self {
        Tower {
            module: Some(module),
            ..Tower::new(op)
        }
    }

    pub fn cooperad(&self) -> &Arc<dyn Cooperad> {
        &self.op
    }

    pub fn is_comodule(&self) -> bool {
        self.module.is_some()
    }

    /// Factor sequences of `power(n)`, n ≥ 1.
    pub fn seqs(&self, n: usize) -> Vec<Functor> {
        assert!(n >= 1);
        let mut v = vec![self.op.seq(); n];
        if let Some(m) = &self.module {
            v[n - 1] = m.seq();
        }
        v
    }

    pub fn power(&self, n: usize) -> Arc<KanFunctor> {
        self.powers
            .lock()
            .expect("powers")
            .entry(n)
            .or_insert_with(|| Arc::new(KanFunctor::new(self.seqs(n))))
            .clone()
    }

    pub fn power_rank(&self, n: usize, arity: usize) -> usize {
        if n == 0 {
            usize::from(arity == 1)
        } else {
            self.power(n).rank(arity)
        }
    }

    fn split(&self, src_len: usize, depth: usize, sub: &Chain) -> Result<Matrix> {
        match &self.module {
            Some(m) if depth == src_len - 1 => m.coaction(sub),
            _ => self.op.cocomp(sub),
        }
    }

    /// `Δ̃ⁿᵢ` at an n-chain `c`: `(⊙)(∂ᵢc) → (⊙)(c)`, applying the
    /// cocomposition at the depth `i−1` vertices.
    pub fn tilde_delta_at(&self, i: usize, c: &Chain) -> Result<Matrix> {
        let n = c.len();
        if n < 2 || i == 0 || i >= n {
            return Err(Error::arg(format!("position {i} out of range for a {n}-chain")));
        }
        let src = c.face(i)?;
        let src_seqs = self.seqs(n - 1);
        let tgt_seqs = self.seqs(n);
        let src_ranks = factor_ranks(&src_seqs, &src);
        let tgt_ranks = factor_ranks(&tgt_seqs, c);
        let mut blocks = Vec::new();
        for (vi, v) in src.vertices().iter().enumerate() {
            let d = v.depth;
            let r = src_ranks[vi];
            if d + 1 < i {
                let ti = v.elem.map_or(0, |e| c.vertex_index(d - 1, e));
                blocks.push(Block::single(vi, ti, Matrix::identity(r)));
            } else if d + 1 == i {
                let vertex = v.elem.map(|e| (d - 1, e));
                let (sub, start, idx) = c.subtree(vertex, 2);
                let mut tgt = vec![vertex.map_or(0, |(j, e)| c.vertex_index(j, e))];
                tgt.extend(idx[0].iter().map(|&k| c.vertex_index(start, k)));
                let m = self.split(n - 1, d, &sub)?;
                let rows: usize = tgt.iter().map(|&t| tgt_ranks[t]).product();
                check_shape(&m, rows, r, "cocomposition", &sub)?;
                blocks.push(Block {
                    src: vec![vi],
                    tgt,
                    matrix: m,
                });
            } else {
                let e = v.elem.expect("non-root");
                blocks.push(Block::single(vi, c.vertex_index(d, e), Matrix::identity(r)));
            }
        }
        Ok(tensor_map(&src_ranks, &tgt_ranks, &blocks))
    }

    /// `ε̃ⁿⱼ` at an n-chain `d`: `(⊙)(sⱼd) → (⊙)(d)`, applying the counit at
    /// the depth `j` vertices of `sⱼd`.
    pub fn tilde_epsilon_at(&self, j: usize, d: &Chain) -> Result<Matrix> {
        let n = d.len();
        if j > n || (self.is_comodule() && j >= n) {
            return Err(Error::arg(format!("codegeneracy {j} out of range for a {n}-chain")));
        }
        let src = d.degeneracy(j)?;
        let src_ranks = factor_ranks(&self.seqs(n + 1), &src);
        let tgt_ranks = factor_ranks(&self.seqs(n), d);
        let counit = self.op.counit();
        let mut blocks = Vec::new();
        for (vi, v) in src.vertices().iter().enumerate() {
            let dep = v.depth;
            let r = src_ranks[vi];
            if dep == j {
                blocks.push(Block {
                    src: vec![vi],
                    tgt: Vec::new(),
                    matrix: counit.clone(),
                });
                continue;
            }
            let e = v.elem;
            let ti = if dep < j {
                e.map_or(0, |e| d.vertex_index(dep - 1, e))
            } else if dep == 1 {
                0
            } else {
                d.vertex_index(dep - 2, e.expect("non-root"))
            };
            blocks.push(Block::single(vi, ti, Matrix::identity(r)));
        }
        Ok(tensor_map(&src_ranks, &tgt_ranks, &blocks))
    }

    fn cached(&self, key: (char, usize, usize, usize), f: impl FnOnce() -> Result<Matrix>) -> Result<Matrix> {
        if let Some(m) = self.maps.lock().expect("maps").get(&key) {
            return Ok((**m).clone());
        }
        let m = f()?;
        self.maps.lock().expect("maps").insert(key, Arc::new(m.clone()));
        Ok(m)
    }

    /// The coface `Δⁿᵢ: power(n−1) → power(n)` at arity `m`, 1 ≤ i ≤ n−1.
    pub fn coface(&self, n: usize, i: usize, arity: usize) -> Result<Matrix> {
        if n < 2 || i == 0 || i >= n {
            return Err(Error::arg(format!("coface Δ^{n}_{i} does not exist")));
        }
        self.cached(('d', n, i, arity), || {
            let src = self.power(n - 1).module(arity);
            let tgt = self.power(n).module(arity);
            tgt.solve(src.rank(), |c| {
                Ok(self.tilde_delta_at(i, c)?.mul(&src.projection(&c.face(i)?)))
            })
            .map_err(|e| match e {
                Error::Structural { context, witness } => {
                    Error::structural(format!("coface Δ^{n}_{i} at arity {arity}: {context}"), witness)
                }
                e => e,
            })
        })
    }

    /// The codegeneracy `εⁿⱼ: power(n+1) → power(n)` at arity `m`.
    pub fn codegeneracy(&self, n: usize, j: usize, arity: usize) -> Result<Matrix> {
        if j > n || (self.is_comodule() && (n == 0 || j >= n)) {
            return Err(Error::arg(format!("codegeneracy ε^{n}_{j} does not exist")));
        }
        self.cached(('s', n, j, arity), || {
            let src = self.power(n + 1).module(arity);
            if n == 0 {
                return Ok(if arity == 1 {
                    self.op.counit()
                } else {
                    Matrix::zeros(0, src.rank())
                });
            }
            let tgt = self.power(n).module(arity);
            tgt.solve(src.rank(), |d| {
                Ok(self.tilde_epsilon_at(j, d)?.mul(&src.projection(&d.degeneracy(j)?)))
            })
        })
    }

    /// All sequences `[i₂, …, iₙ]` of coface indices from power 1 to power n.
    pub fn coface_paths(n: usize) -> Vec<Vec<usize>> {
        let mut paths = vec![Vec::new()];
        for k in 2..=n {
            paths = paths
                .into_iter()
                .flat_map(|p| {
                    (1..k).map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        paths
    }

    /// `ι_d ∘ Δⁿ_{iₙ} ∘ ⋯ ∘ Δ²_{i₂}` for an n-chain `d`, computed through
    /// the cocompositions without forming the Kan modules.
    pub fn projected_path(&self, path: &[usize], d: &Chain) -> Result<Matrix> {
        match path.split_last() {
            None => Ok(Matrix::identity(self.seqs(1)[0].rank(d.top().len()))),
            Some((&i, rest)) => Ok(self.tilde_delta_at(i, d)?.mul(&self.projected_path(rest, &d.face(i)?)?)),
        }
    }

    /// `Δ^{[n]}: power(1) → power(n)` along one coface path, as a matrix.
    pub fn iterated_coface(&self, path: &[usize], arity: usize) -> Result<Matrix> {
        let mut m = Matrix::identity(self.power_rank(1, arity));
        for (k, &i) in path.iter().enumerate() {
            m = self.coface(k + 2, i, arity)?.mul(&m);
        }
        Ok(m)
    }
}

fn compare(lhs: &Matrix, rhs: &Matrix) -> std::result::Result<(), String> {
    if lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols() {
        return Err(format!(
            "shapes {}x{} and {}x{}",
            lhs.rows(),
            lhs.cols(),
            rhs.rows(),
            rhs.cols()
        ));
    }
    match lhs.first_difference(rhs) {
        None => Ok(()),
        Some((r, c, a, b)) => Err(format!("entry ({r},{c}): {a} vs {b}")),
    }
}

fn expect_identity(m: &Matrix) -> std::result::Result<(), String> {
    compare(m, &Matrix::identity(m.cols()))
}

fn merge(parts: Vec<Report>) -> Report {
    let mut r = Report::new();
    for p in parts {
        r.extend(p);
    }
    r
}

fn record_result(report: &mut Report, check: &str, instance: String, outcome: Result<std::result::Result<(), String>>) {
    match outcome {
        Ok(o) => report.record(check, instance, o),
        Err(e) => report.fail(check, instance, e.to_string()),
    }
}

/// Checks coassociativity on all 3-chains, both counit laws and naturality
/// of the cocomposition on 2-chains, with levels of at most `max_set`
/// elements.
pub fn verify_cooperad(op: Arc<dyn Cooperad>, max_set: usize) -> Report {
    let tower = Tower::new(op.clone());
    let mut report = Report::new();
    report.extend(check_coassociativity(&tower, max_set));
    report.extend(check_counit(&tower, max_set));
    report.extend(check_naturality(&op, max_set));
    report
}

/// `Δ̃³₁(c) ∘ Δ̃(∂₁c) = Δ̃³₂(c) ∘ Δ̃(∂₂c)` on 3-chains (for comodules, with
/// the coaction in the top factor).
pub fn check_coassociativity(tower: &Tower, max_set: usize) -> Report {
    let chains = enumerate_iso_classes(3, max_set, max_set);
    let check = if tower.is_comodule() {
        "coaction.coassociativity"
    } else {
        "coassociativity"
    };
    let parts: Vec<Report> = chains
        .par_iter()
        .map(|c| {
            let mut r = Report::new();
            let outcome = (|| -> Result<_> {
                let lhs = tower.tilde_delta_at(1, c)?.mul(&tower.tilde_delta_at(1, &c.face(1)?)?);
                let rhs = tower.tilde_delta_at(2, c)?.mul(&tower.tilde_delta_at(1, &c.face(2)?)?);
                Ok(compare(&lhs, &rhs))
            })();
            record_result(&mut r, check, c.to_string(), outcome);
            r
        })
        .collect();
    merge(parts)
}

/// `ε̃¹₀ ∘ Δ̃(s₀S) = id` and `ε̃¹₁ ∘ Δ̃(s₁S) = id`, reported separately
/// (for comodules only the first applies).
pub fn check_counit(tower: &Tower, max_set: usize) -> Report {
    let mut report = Report::new();
    for m in 0..=max_set {
        let s = Chain::single(FinSet::standard(m));
        let sides: &[(usize, &str)] = if tower.is_comodule() {
            &[(0, "coaction.counit")]
        } else {
            &[(0, "counit.left"), (1, "counit.right")]
        };
        for &(j, check) in sides {
            let outcome = (|| -> Result<_> {
                let c = s.degeneracy(j)?;
                let m = tower.tilde_epsilon_at(j, &s)?.mul(&tower.tilde_delta_at(1, &c)?);
                Ok(expect_identity(&m))
            })();
            record_result(&mut report, check, format!("|S| = {m}"), outcome);
        }
    }
    report
}

/// Naturality of a 2-chain transformation under every levelwise bijection.
fn naturality_report(
    check: &str,
    seqs: [Functor; 2],
    max_set: usize,
    top_only: bool,
    f: &(dyn Fn(&Chain) -> Result<Matrix> + Sync),
) -> Report {
    let chains: Vec<Chain> = enumerate_iso_classes(2, max_set, max_set)
        .into_iter()
        .filter(|c| !top_only || c.top().is_empty())
        .collect();
    let parts: Vec<Report> = chains
        .par_iter()
        .map(|c| {
            let mut r = Report::new();
            let outcome = (|| -> Result<std::result::Result<(), String>> {
                let base = f(c)?;
                let levels = c.levels().to_vec();
                for p0 in permutations(levels[0].len()) {
                    for p1 in permutations(levels[1].len()) {
                        let comps = vec![p0.clone(), p1.clone()];
                        let (c2, phi) = c.transport(&comps, levels.clone())?;
                        let lhs = iso_transport(&seqs, c, &c2, &phi).mul(&base);
                        let rhs = f(&c2)?.mul(&seqs[1].act(&p1));
                        if let Err(w) = compare(&lhs, &rhs) {
                            return Ok(Err(format!("along {comps:?}: {w}")));
                        }
                    }
                }
                Ok(Ok(()))
            })();
            record_result(&mut r, check, c.to_string(), outcome);
            r
        })
        .collect();
    merge(parts)
}

pub fn check_naturality(op: &Arc<dyn Cooperad>, max_set: usize) -> Report {
    let op2 = op.clone();
    naturality_report("naturality", [op.seq(), op.seq()], max_set, false, &move |c| op2.cocomp(c))
}

/// Coassociativity, counit and naturality of a comodule.
pub fn verify_comodule(op: Arc<dyn Cooperad>, module: Arc<dyn Comodule>, max_set: usize) -> Report {
    let tower = Tower::with_module(op.clone(), module.clone());
    let mut report = Report::new();
    report.extend(check_coassociativity(&tower, max_set));
    report.extend(check_counit(&tower, max_set));
    let m2 = module.clone();
    report.extend(naturality_report(
        "coaction.naturality",
        [op.seq(), module.seq()],
        max_set,
        false,
        &move |c| m2.coaction(c),
    ));
    report
}

/// The cosimplicial identities among cofaces and codegeneracies of the
/// tower, up to power `max_n`, as matrix equalities at every arity up to
/// `max_set`.
pub fn verify_cosimplicial(tower: &Tower, max_n: usize, max_set: usize) -> Report {
    let comodule = tower.is_comodule();
    let mut jobs: Vec<(usize, &'static str, usize, usize, usize)> = Vec::new();
    for m in 0..=max_set {
        // Δ^{n+1}_j Δ^n_i = Δ^{n+1}_i Δ^n_{j−1} for i < j.
        for n in 2..max_n {
            for j in 2..=n {
                for i in 1..j {
                    jobs.push((m, "cosimplicial.coface", n, i, j));
                }
            }
        }
        // ε^{n−1}_i ε^n_j = ε^{n−1}_{j−1} ε^n_i for i < j.
        for n in 1..max_n {
            let top = if comodule { n.saturating_sub(1) } else { n };
            for j in 1..=top {
                for i in 0..j {
                    if comodule && (n < 2 || j - 1 >= n - 1) {
                        continue;
                    }
                    jobs.push((m, "cosimplicial.codegeneracy", n, i, j));
                }
            }
        }
        // ε^n_j Δ^{n+1}_i against the mixed identities.
        for n in 1..max_n {
            let top = if comodule { n - 1 } else { n };
            for j in 0..=top {
                for i in 1..=n {
                    jobs.push((m, "cosimplicial.mixed", n, i, j));
                }
            }
        }
    }
    let parts: Vec<Report> = jobs
        .par_iter()
        .map(|&(m, check, n, i, j)| {
            let mut r = Report::new();
            let (inst, outcome) = match check {
                "cosimplicial.coface" => (
                    format!("Δ^{}_{j}Δ^{n}_{i} = Δ^{}_{i}Δ^{n}_{} at |S| = {m}", n + 1, n + 1, j - 1),
                    (|| -> Result<_> {
                        let lhs = tower.coface(n + 1, j, m)?.mul(&tower.coface(n, i, m)?);
                        let rhs = tower.coface(n + 1, i, m)?.mul(&tower.coface(n, j - 1, m)?);
                        Ok(compare(&lhs, &rhs))
                    })(),
                ),
                "cosimplicial.codegeneracy" => (
                    format!("ε^{}_{i}ε^{n}_{j} = ε^{}_{}ε^{n}_{i} at |S| = {m}", n - 1, n - 1, j - 1),
                    (|| -> Result<_> {
                        let lhs = tower.codegeneracy(n - 1, i, m)?.mul(&tower.codegeneracy(n, j, m)?);
                        let rhs = tower.codegeneracy(n - 1, j - 1, m)?.mul(&tower.codegeneracy(n, i, m)?);
                        Ok(compare(&lhs, &rhs))
                    })(),
                ),
                _ => (
                    format!("ε^{n}_{j}Δ^{}_{i} at |S| = {m}", n + 1),
                    (|| -> Result<_> {
                        let lhs = tower.codegeneracy(n, j, m)?.mul(&tower.coface(n + 1, i, m)?);
                        let rhs = if i == j || i == j + 1 {
                            Matrix::identity(lhs.cols())
                        } else if i < j {
                            tower.coface(n, i, m)?.mul(&tower.codegeneracy(n - 1, j - 1, m)?)
                        } else {
                            tower.coface(n, i - 1, m)?.mul(&tower.codegeneracy(n - 1, j, m)?)
                        };
                        Ok(compare(&lhs, &rhs))
                    })(),
                ),
            };
            record_result(&mut r, check, inst, outcome);
            r
        })
        .collect();
    merge(parts)
}

/// Parenthesization compatibility: `P ∘ (Δ∘̂Id) = Δ³₁` and
/// `P ∘ (Id∘̂Δ) = Δ³₂` on `O∘̂O`, and the two routes
/// `O → O∘̂O∘̂O` through `(O∘̂O)∘̂O` and `O∘̂(O∘̂O)` agree.
pub fn verify_paren_compat(tower: &Tower, max_set: usize) -> Report {
    let o = tower.cooperad().seq();
    let oo = tower.power(2);
    let ooo = tower.power(3);
    let left = Shape::node(vec![Shape::node_with(vec![Shape::leaf(o.clone()), Shape::leaf(o.clone())], oo.clone()), Shape::leaf(o.clone())]);
    let right = Shape::node(vec![Shape::leaf(o.clone()), Shape::node_with(vec![Shape::leaf(o.clone()), Shape::leaf(o.clone())], oo.clone())]);
    let delta = |r: usize| tower.coface(2, 1, r);
    let ident = |r: usize| -> Result<Matrix> { Ok(Matrix::identity(o.rank(r))) };
    let mut report = Report::new();
    for m in 0..=max_set {
        let outcome = (|| -> Result<std::result::Result<(), String>> {
            let Shape::Node(_, lk) = &left else { unreachable!() };
            let Shape::Node(_, rk) = &right else { unreachable!() };
            let dl = kan_map(&oo, lk, &[&delta, &ident], m)?;
            let dr = kan_map(&oo, rk, &[&ident, &delta], m)?;
            let pl = parenthesize(&left, &ooo, m)?;
            let pr = parenthesize(&right, &ooo, m)?;
            let lhs = pl.mul(&dl);
            if let Err(w) = compare(&lhs, &tower.coface(3, 1, m)?) {
                return Ok(Err(format!("P∘(Δ∘̂Id) vs Δ³₁: {w}")));
            }
            let rhs = pr.mul(&dr);
            if let Err(w) = compare(&rhs, &tower.coface(3, 2, m)?) {
                return Ok(Err(format!("P∘(Id∘̂Δ) vs Δ³₂: {w}")));
            }
            let d = tower.coface(2, 1, m)?;
            if let Err(w) = compare(&lhs.mul(&d), &rhs.mul(&d)) {
                return Ok(Err(format!("routes through (O∘̂O)∘̂O and O∘̂(O∘̂O): {w}")));
            }
            Ok(Ok(()))
        })();
        record_result(&mut report, "paren.compat", format!("|S| = {m}"), outcome);
    }
    report
}

/// Path independence of `Δ^{[n]}` for `2 ≤ n ≤ max_n` at the given arity,
/// compared through every limit projection of the target.
pub fn check_delta_n(tower: &Tower, max_n: usize, arity: usize) -> Report {
    let mut report = Report::new();
    for n in 2..=max_n {
        let paths = Tower::coface_paths(n);
        let classes = nonzero_classes(&tower.seqs(n), arity);
        let parts: Vec<Report> = classes
            .par_iter()
            .map(|(d, _)| {
                let mut r = Report::new();
                let outcome = (|| -> Result<std::result::Result<(), String>> {
                    let first = tower.projected_path(&paths[0], d)?;
                    for p in &paths[1..] {
                        let other = tower.projected_path(p, d)?;
                        if let Err(w) = compare(&first, &other) {
                            return Ok(Err(format!("paths {:?} and {p:?}: {w}", paths[0])));
                        }
                    }
                    Ok(Ok(()))
                })();
                record_result(&mut r, "delta_n.path_independence", format!("n = {n}, {d}"), outcome);
                r
            })
            .collect();
        report.extend(merge(parts));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cooperad_passes() {
        let op: Arc<dyn Cooperad> = Arc::new(UnitCooperad);
        let r = verify_cooperad(op.clone(), 3);
        assert!(r.all_pass(), "{}", r.to_text());
        let t = Tower::new(op);
        let r = verify_cosimplicial(&t, 3, 2);
        assert!(r.all_pass(), "{}", r.to_text());
        assert!(t.coface(2, 1, 1).unwrap().is_identity());
        assert!(t.codegeneracy(1, 0, 1).unwrap().is_identity());
        let r = verify_paren_compat(&t, 2);
        assert!(r.all_pass(), "{}", r.to_text());
    }

    #[test]
    fn coface_paths_count() {
        assert_eq!(Tower::coface_paths(1), vec![Vec::<usize>::new()]);
        assert_eq!(Tower::coface_paths(3), vec![vec![1, 1], vec![1, 2]]);
        assert_eq!(Tower::coface_paths(4).len(), 6);
    }

    #[test]
    fn counit_coalgebra() {
        let op: Arc<dyn Cooperad> = Arc::new(UnitCooperad);
        let c = Coalgebra::new("trivial", op.as_ref(), vec!["c".into()], &[(1, Matrix::identity(1))]).unwrap();
        let c: Arc<dyn Comodule> = Arc::new(c);
        let r = verify_comodule(op.clone(), c.clone(), 3);
        assert!(r.all_pass(), "{}", r.to_text());
        let t = Tower::with_module(op, c);
        for n in 1..=4 {
            let path = vec![1; n - 1];
            let m = t.iterated_coface(&path, 0).unwrap();
            assert!(m.is_identity(), "n = {n}");
        }
        assert!(check_delta_n(&t, 4, 0).all_pass());
    }
}
