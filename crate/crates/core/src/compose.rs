//! The tree-functor product ⊙, its right Kan extension ∘̂ along the leaf
//! functor, an independent closed-form construction of A∘̂B, composition with
//! a module coefficient, and parenthesization maps.
//!
//! A value `(A₁∘̂⋯∘̂Aₙ)(S)` is stored as the product, over isomorphism classes
//! of n-chains with top `S` (isomorphisms fixing `S`), of the invariants of
//! the tensor word `(A₁⊙⋯⊙Aₙ)(c)` under the automorphisms of `c`. Classes
//! whose tensor word is zero are omitted; with finitely supported sequences
//! this leaves finitely many classes, so no truncation error is introduced.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::Report;
use crate::symseq::{SymFunctor, SymSeq};
use crate::wreath::{fiber_classes, invert, Chain, ChainIso, FiberBounds, FinSet};
use crate::zmodule::{fixed_submodule, solve_exact, FreeMod, Lattice, Matrix, SignedImage, SignedPerm, SignedPermAction, SparseMatrix, Tag};

pub type Functor = Arc<dyn SymFunctor>;

/// Ranks of the tensor factors of `(seqs[0] ⊙ ⋯)(c)` in vertex order.
pub fn factor_ranks(seqs: &[Functor], c: &Chain) -> Vec<usize> {
    c.vertices()
        .iter()
        .map(|v| seqs[v.depth].rank(v.fiber.len()))
        .collect()
}

pub fn product(ranks: &[usize]) -> usize {
    ranks.iter().product()
}

/// The tensor word `(A₁⊙⋯⊙Aₙ)(c)`.
#[derive(Clone, Debug)]
pub struct TensorValue {
    pub chain: Chain,
    pub factor_ranks: Vec<usize>,
    pub value: FreeMod,
}

pub fn eval_tensor(seqs: &[Functor], c: &Chain) -> Result<TensorValue> {
    if seqs.len() != c.len() {
        return Err(Error::arg(format!(
            "{} sequences for a chain of length {}",
            seqs.len(),
            c.len()
        )));
    }
    let vertices = c.vertices();
    let factor_ranks = factor_ranks(seqs, c);
    let mut words: Vec<Vec<Tag>> = vec![Vec::new()];
    for (v, &r) in vertices.iter().zip(&factor_ranks) {
        let name = match v.elem {
            None => "root".to_string(),
            Some(e) => c.level(v.depth - 1).get(e).to_string(),
        };
        let mut next = Vec::with_capacity(words.len() * r);
        for w in &words {
            for i in 0..r {
                let mut w = w.clone();
                w.push(Tag::Named(format!("{name}:{i}")));
                next.push(w);
            }
        }
        words = next;
    }
    let value = FreeMod::new(words.into_iter().map(Tag::Word).collect())?;
    Ok(TensorValue {
        chain: c.clone(),
        factor_ranks,
        value,
    })
}

/// One tensor factor of a map between tensor words: sends the listed source
/// factors to the listed target factors by `matrix` (indices lexicographic,
/// first listed factor most significant).
#[derive(Clone, Debug)]
pub struct Block {
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    pub matrix: Matrix,
}

impl Block {
    pub fn single(src: usize, tgt: usize, matrix: Matrix) -> Self {
        Block {
            src: vec![src],
            tgt: vec![tgt],
            matrix,
        }
    }
}

fn strides(ranks: &[usize]) -> Vec<usize> {
    let mut s = vec![1; ranks.len()];
    for i in (0..ranks.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * ranks[i + 1];
    }
    s
}

/// Assembles the map between tensor words from blocks. Every source and
/// every target factor must occur in exactly one block.
pub fn tensor_map(src_ranks: &[usize], tgt_ranks: &[usize], blocks: &[Block]) -> Matrix {
    let src_dim = product(src_ranks);
    let tgt_dim = product(tgt_ranks);
    let mut out = Matrix::zeros(tgt_dim, src_dim);
    let mut src_seen = vec![false; src_ranks.len()];
    let mut tgt_seen = vec![false; tgt_ranks.len()];
    for b in blocks {
        for &s in &b.src {
            assert!(!std::mem::replace(&mut src_seen[s], true), "source factor {s} used twice");
        }
        for &t in &b.tgt {
            assert!(!std::mem::replace(&mut tgt_seen[t], true), "target factor {t} used twice");
        }
        let rows: usize = b.tgt.iter().map(|&t| tgt_ranks[t]).product();
        let cols: usize = b.src.iter().map(|&s| src_ranks[s]).product();
        assert_eq!(
            (b.matrix.rows(), b.matrix.cols()),
            (rows, cols),
            "block matrix shape"
        );
    }
    assert!(src_seen.iter().all(|&x| x), "uncovered source factor");
    assert!(tgt_seen.iter().all(|&x| x), "uncovered target factor");
    if src_dim == 0 || tgt_dim == 0 {
        return out;
    }
    let sst = strides(src_ranks);
    let tst = strides(tgt_ranks);
    struct Prepared {
        src_strides: Vec<(usize, usize, usize)>,
        columns: Vec<Vec<(usize, i64)>>,
    }
    let prepared: Vec<Prepared> = blocks
        .iter()
        .map(|b| {
            let local_src: Vec<usize> = b.src.iter().map(|&s| src_ranks[s]).collect();
            let lst = strides(&local_src);
            let src_strides = b
                .src
                .iter()
                .zip(&lst)
                .map(|(&s, &l)| (sst[s], src_ranks[s], l))
                .collect();
            let local_tgt: Vec<usize> = b.tgt.iter().map(|&t| tgt_ranks[t]).collect();
            let ltt = strides(&local_tgt);
            let row_offset: Vec<usize> = (0..b.matrix.rows())
                .map(|r| {
                    b.tgt
                        .iter()
                        .zip(&local_tgt)
                        .zip(&ltt)
                        .map(|((&t, &rank), &stride)| ((r / stride) % rank) * tst[t])
                        .sum()
                })
                .collect();
            let columns = (0..b.matrix.cols())
                .map(|c| {
                    b.matrix
                        .column_nonzeros(c)
                        .into_iter()
                        .map(|(r, v)| (row_offset[r], v))
                        .collect()
                })
                .collect();
            Prepared {
                src_strides,
                columns,
            }
        })
        .collect();
    let mut partial: Vec<(usize, i64)> = Vec::new();
    let mut next: Vec<(usize, i64)> = Vec::new();
    for col in 0..src_dim {
        partial.clear();
        partial.push((0, 1));
        for p in &prepared {
            let local: usize = p
                .src_strides
                .iter()
                .map(|&(gs, rank, ls)| ((col / gs) % rank) * ls)
                .sum();
            let nz = &p.columns[local];
            next.clear();
            for &(idx, v) in &partial {
                for &(off, w) in nz {
                    next.push((idx + off, v * w));
                }
            }
            std::mem::swap(&mut partial, &mut next);
            if partial.is_empty() {
                break;
            }
        }
        for &(idx, v) in &partial {
            out.add_to(idx, col, v);
        }
    }
    out
}

/// The map `(⊙)(src) → (⊙)(tgt)` induced by a chain isomorphism: each factor
/// is transported along the induced bijection of incoming edges and moved
/// to the position of the image vertex.
pub fn iso_transport(seqs: &[Functor], src: &Chain, tgt: &Chain, iso: &ChainIso) -> Matrix {
    let sv = src.vertices();
    let src_ranks = factor_ranks(seqs, src);
    let tgt_ranks = factor_ranks(seqs, tgt);
    let blocks: Vec<Block> = iso
        .vertex_transport(src, tgt)
        .into_iter()
        .zip(&sv)
        .enumerate()
        .map(|(i, ((ti, perm), v))| Block::single(i, ti, seqs[v.depth].act(&perm)))
        .collect();
    tensor_map(&src_ranks, &tgt_ranks, &blocks)
}

/// Isomorphism classes (over `{1..arity}`) of chains with a nonzero tensor
/// word, with generators of their automorphism groups.
pub fn nonzero_classes(seqs: &[Functor], arity: usize) -> Vec<(Chain, Vec<ChainIso>)> {
    assert!(!seqs.is_empty(), "at least one sequence");
    let n = seqs.len();
    let mut level_max = Vec::with_capacity(n - 1);
    let mut bound = 1usize;
    for s in seqs.iter().take(n - 1) {
        bound = bound.saturating_mul(s.max_support());
        level_max.push(bound);
    }
    let admissible = |depth: usize, size: usize| seqs[depth].supports(size);
    let fb = FiberBounds {
        level_max,
        admissible: &admissible,
    };
    fiber_classes(&FinSet::standard(arity), n, &fb)
        .into_iter()
        .filter(|(c, _)| product(&factor_ranks(seqs, c)) > 0)
        .collect()
}

/// One isomorphism class of chains over the base set with a nonzero tensor
/// word, and the invariant lattice of that word.
#[derive(Clone, Debug)]
pub struct KanClass {
    pub chain: Chain,
    pub factor_ranks: Vec<usize>,
    pub generators: Vec<ChainIso>,
    pub lattice: Lattice,
    pub inclusion: Matrix,
    pub offset: usize,
}

impl KanClass {
    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }
}

/// `(A₁∘̂⋯∘̂Aₙ)({1..m})` with its limit projections.
pub struct KanModule {
    seqs: Vec<Functor>,
    arity: usize,
    classes: Vec<KanClass>,
    index: HashMap<Chain, usize>,
    rank: usize,
    act_cache: Mutex<HashMap<Vec<usize>, Matrix>>,
}

impl KanModule {
    pub fn new(seqs: Vec<Functor>, arity: usize) -> Self {
        let mut classes = Vec::new();
        let mut offset = 0;
        for (chain, generators) in nonzero_classes(&seqs, arity) {
            let ranks = factor_ranks(&seqs, &chain);
            let dim = product(&ranks);
            let mats: Vec<Matrix> = generators
                .iter()
                .map(|g| iso_transport(&seqs, &chain, &chain, g))
                .collect();
            let lattice = Lattice::invariants(dim, &mats);
            let inclusion = lattice.inclusion();
            let r = lattice.rank();
            classes.push(KanClass {
                chain,
                factor_ranks: ranks,
                generators,
                lattice,
                inclusion,
                offset,
            });
            offset += r;
        }
        let index = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.chain.clone(), i))
            .collect();
        KanModule {
            seqs,
            arity,
            classes,
            index,
            rank: offset,
            act_cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn seqs(&self) -> &[Functor] {
        &self.seqs
    }

    pub fn classes(&self) -> &[KanClass] {
        &self.classes
    }

    /// Basis tags: the class chain and the index within its invariant lattice.
    pub fn value(&self) -> FreeMod {
        let mut basis = Vec::with_capacity(self.rank);
        for c in &self.classes {
            for j in 0..c.rank() {
                basis.push(Tag::Word(vec![Tag::Named(c.chain.to_string()), Tag::Named(j.to_string())]));
            }
        }
        FreeMod::new(basis).expect("distinct tags")
    }

    fn class_projection(&self, ci: usize) -> Matrix {
        let c = &self.classes[ci];
        let mut m = Matrix::zeros(c.inclusion.rows(), self.rank);
        for r in 0..c.inclusion.rows() {
            for k in 0..c.rank() {
                m.set(r, c.offset + k, c.inclusion.get(r, k));
            }
        }
        m
    }

    /// The limit projection `ι_c: value → (⊙)(c)` for any chain `c` whose top
    /// has `arity` elements (identified with `{1..m}` by order).
    pub fn projection(&self, c: &Chain) -> Matrix {
        assert_eq!(c.len(), self.seqs.len(), "chain length");
        assert_eq!(c.top().len(), self.arity, "chain top size");
        let std = c
            .with_top(FinSet::standard(self.arity))
            .expect("same size");
        let (rep, psi) = std.canonical_over_top();
        match self.index.get(&rep) {
            None => Matrix::zeros(product(&factor_ranks(&self.seqs, c)), self.rank),
            Some(&ci) => {
                let back = iso_transport(&self.seqs, &rep, &std, &psi.inverse());
                back.mul(&self.class_projection(ci))
            }
        }
    }

    /// The unique map `X → value` whose projection at every class chain is
    /// `target(chain)` (a matrix with `cols` columns), if it exists over ℤ.
    pub fn solve(&self, cols: usize, mut target: impl FnMut(&Chain) -> Result<Matrix>) -> Result<Matrix> {
        let mut out = Matrix::zeros(self.rank, cols);
        for c in &self.classes {
            let m = target(&c.chain)?;
            if m.rows() != c.inclusion.rows() || m.cols() != cols {
                return Err(Error::arg(format!(
                    "component at {} has shape {}x{}, expected {}x{}",
                    c.chain,
                    m.rows(),
                    m.cols(),
                    c.inclusion.rows(),
                    cols
                )));
            }
            for j in 0..cols {
                let v = m.column(j);
                let x = c.lattice.coords(&v).ok_or_else(|| {
                    Error::structural(
                        format!("limit cone at {}", c.chain),
                        format!("column {j} is not invariant under the automorphisms of the chain"),
                    )
                })?;
                for (k, xv) in x.into_iter().enumerate() {
                    out.set(c.offset + k, j, xv);
                }
            }
        }
        Ok(out)
    }

    /// The action of `π ∈ Σ_m` on the value.
    pub fn act(&self, perm: &[usize]) -> Matrix {
        assert_eq!(perm.len(), self.arity);
        if let Some(m) = self.act_cache.lock().expect("cache").get(perm) {
            return m.clone();
        }
        let inv = invert(perm);
        let n = self.seqs.len();
        let m = self
            .solve(self.rank, |d| {
                if n == 1 {
                    return Ok(self.seqs[0].act(perm).mul(&self.projection(d)));
                }
                let c = d.permute_top(&inv);
                let mut comps: Vec<Vec<usize>> = c.levels().iter().map(|l| (0..l.len()).collect()).collect();
                comps[n - 1] = perm.to_vec();
                let phi = ChainIso { components: comps };
                Ok(iso_transport(&self.seqs, &c, d, &phi).mul(&self.projection(&c)))
            })
            .expect("the symmetric group acts on a right Kan extension");
        self.act_cache
            .lock()
            .expect("cache")
            .insert(perm.to_vec(), m.clone());
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct ClassOut {
            chain: String,
            rank: usize,
            inclusion: SparseMatrix,
        }
        let classes: Vec<ClassOut> = self
            .classes
            .iter()
            .map(|c| ClassOut {
                chain: c.chain.to_string(),
                rank: c.rank(),
                inclusion: c.inclusion.to_sparse(),
            })
            .collect();
        serde_json::json!({
            "arity": self.arity,
            "rank": self.rank,
            "classes": classes,
        })
    }
}

/// `A₁∘̂⋯∘̂Aₙ` as a symmetric sequence, with values computed on demand.
pub struct KanFunctor {
    seqs: Vec<Functor>,
    cache: Mutex<BTreeMap<usize, Arc<OnceLock<Arc<KanModule>>>>>,
}

impl KanFunctor {
    pub fn new(seqs: Vec<Functor>) -> Self {
        assert!(!seqs.is_empty(), "at least one sequence");
        KanFunctor {
            seqs,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn seqs(&self) -> &[Functor] {
        &self.seqs
    }

    pub fn module(&self, arity: usize) -> Arc<KanModule> {
        let cell = self
            .cache
            .lock()
            .expect("cache")
            .entry(arity)
            .or_default()
            .clone();
        cell.get_or_init(|| Arc::new(KanModule::new(self.seqs.clone(), arity)))
            .clone()
    }
}

impl SymFunctor for KanFunctor {
    fn rank(&self, arity: usize) -> usize {
        if arity > self.max_support() {
            return 0;
        }
        self.module(arity).rank()
    }

    fn max_support(&self) -> usize {
        self.seqs
            .iter()
            .fold(1usize, |b, s| b.saturating_mul(s.max_support()))
    }

    fn act(&self, perm: &[usize]) -> Matrix {
        if self.rank(perm.len()) == 0 {
            return Matrix::zeros(0, 0);
        }
        self.module(perm.len()).act(perm)
    }
}

/// `(A₁∘̂⋯∘̂Aₙ)(S)` for the standard set of size |S|.
pub fn kan_extension(seqs: &[Functor], s: &FinSet) -> KanModule {
    KanModule::new(seqs.to_vec(), s.len())
}

/// `(A∘̂B)(n)` assembled directly as the product over k of the
/// Σ_k-invariants of `⊕_φ A(k) ⊗ B(φ⁻¹(1)) ⊗ ⋯ ⊗ B(φ⁻¹(k))`, φ ranging over
/// all maps `{1..n} → {1..k}` whose fibers lie in the support of B.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub arity: usize,
    /// `(k, φ)` per summand, in ambient order.
    pub terms: Vec<(usize, Vec<usize>)>,
    pub term_offsets: Vec<usize>,
    pub dim: usize,
    pub lattice: Lattice,
}

impl ClosedForm {
    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }
}

fn all_functions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * k);
        for f in &out {
            for t in 0..k {
                let mut g = f.clone();
                g.push(t);
                next.push(g);
            }
        }
        out = next;
    }
    out
}

pub fn closed_form_compose(a: &SymSeq, b: &SymSeq, n: usize) -> ClosedForm {
    let mut terms = Vec::new();
    let mut term_offsets = Vec::new();
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut invariant_rows: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut dim = 0;
    for k in 0..=a.max_arity() {
        let ra = a.basis(k).len();
        if ra == 0 {
            continue;
        }
        let phis: Vec<Vec<usize>> = all_functions(n, k)
            .into_iter()
            .filter(|phi| (0..k).all(|t| !b.basis(phi.iter().filter(|&&x| x == t).count()).is_empty()))
            .collect();
        if phis.is_empty() {
            continue;
        }
        let start = dim;
        let mut local_offsets = Vec::new();
        let mut shapes = Vec::new();
        let mut local = 0;
        for phi in &phis {
            let sizes: Vec<usize> = (0..k)
                .map(|t| b.basis(phi.iter().filter(|&&x| x == t).count()).len())
                .collect();
            local_offsets.push(local);
            local += ra * sizes.iter().product::<usize>();
            shapes.push(sizes);
            terms.push((k, phi.clone()));
            term_offsets.push(dim + local_offsets.last().copied().unwrap_or(0));
        }
        let index: HashMap<&Vec<usize>, usize> = phis.iter().enumerate().map(|(i, p)| (p, i)).collect();
        // Σ_k generators: adjacent transpositions of {1..k}.
        let gens: Vec<SignedPerm> = (0..k.saturating_sub(1))
            .map(|t| {
                let mut sigma: Vec<usize> = (0..k).collect();
                sigma.swap(t, t + 1);
                let rho_a = a.act_signed(&sigma);
                let mut images = vec![SignedImage { to: 0, sign: 1 }; local];
                for (pi, phi) in phis.iter().enumerate() {
                    let moved: Vec<usize> = phi.iter().map(|&x| sigma[x]).collect();
                    let qi = index[&moved];
                    let src_sizes = &shapes[pi];
                    let tgt_sizes = &shapes[qi];
                    let src_st = strides(src_sizes);
                    let tgt_st = strides(tgt_sizes);
                    let inner: usize = src_sizes.iter().product();
                    for ai in 0..ra {
                        let img_a = rho_a.images[ai];
                        for bi in 0..inner {
                            // B-factor in slot u moves to slot sigma[u].
                            let mut tgt_inner = 0;
                            for u in 0..k {
                                let digit = (bi / src_st[u]) % src_sizes[u];
                                tgt_inner += digit * tgt_st[sigma[u]];
                            }
                            images[local_offsets[pi] + ai * inner + bi] = SignedImage {
                                to: local_offsets[qi] + img_a.to * tgt_sizes.iter().product::<usize>() + tgt_inner,
                                sign: img_a.sign,
                            };
                        }
                    }
                }
                SignedPerm { images }
            })
            .collect();
        let module = FreeMod::named(local, "t");
        let action = SignedPermAction::generated(local, &gens);
        let (_, incl) = fixed_submodule(&module, &action).expect("valid action");
        let rows: Vec<Vec<i64>> = (0..incl.matrix.cols()).map(|j| incl.matrix.column(j)).collect();
        invariant_rows.push(rows);
        blocks.push((start, local));
        dim += local;
    }
    let mut gens = Vec::new();
    for ((start, _), rows) in blocks.iter().zip(invariant_rows) {
        for r in rows {
            let mut v = vec![0; dim];
            v[*start..*start + r.len()].copy_from_slice(&r);
            gens.push(v);
        }
    }
    ClosedForm {
        arity: n,
        terms,
        term_offsets,
        dim,
        lattice: Lattice::from_generators(dim, gens),
    }
}

/// Compares `(A∘̂B)(n)` computed as a right Kan extension with the closed
/// form: the images of the limit projections at the chains `{1..k} ← {1..n}`
/// must span exactly the closed-form invariant lattice.
pub fn compare_with_closed_form(a: &Arc<SymSeq>, b: &Arc<SymSeq>, n: usize) -> std::result::Result<usize, String> {
    let cf = closed_form_compose(a, b, n);
    let kan = KanModule::new(vec![a.clone() as Functor, b.clone() as Functor], n);
    if kan.rank() != cf.rank() {
        return Err(format!("rank {} (Kan) vs {} (closed form)", kan.rank(), cf.rank()));
    }
    let mut blocks = Vec::with_capacity(cf.terms.len());
    for (k, phi) in &cf.terms {
        let chain = Chain::new(
            vec![FinSet::standard(*k), FinSet::standard(n)],
            vec![phi.clone()],
        )
        .map_err(|e| e.to_string())?;
        blocks.push(kan.projection(&chain));
    }
    let emb = Matrix::vstack(&blocks, kan.rank());
    if emb.rows() != cf.dim {
        return Err(format!("ambient dimension {} vs {}", emb.rows(), cf.dim));
    }
    let image = Lattice::from_generators(cf.dim, (0..kan.rank()).map(|j| emb.column(j)).collect());
    if image.rank() != kan.rank() {
        return Err("limit projections are not jointly injective".into());
    }
    if image.basis() != cf.lattice.basis() {
        return Err("Hermite bases differ".into());
    }
    Ok(kan.rank())
}

/// `(A₁∘̂⋯∘̂Aₖ∘̂a)` at the empty set: the leafless Kan extension with the
/// coefficient module `a` placed in arity 0.
pub fn compose_with_coefficient(seqs: &[Functor], a: &[String]) -> KanModule {
    let mut all = seqs.to_vec();
    all.push(Arc::new(SymSeq::concentrated_in_zero(a.to_vec())));
    KanModule::new(all, 0)
}

/// A parenthesization of a composite `A₁∘̂⋯∘̂Aₙ`.
#[derive(Clone)]
pub enum Shape {
    Leaf(Functor),
    Node(Vec<Shape>, Arc<KanFunctor>),
}

impl Shape {
    pub fn leaf(f: Functor) -> Shape {
        Shape::Leaf(f)
    }

    pub fn node(children: Vec<Shape>) -> Shape {
        let fs = children.iter().map(Shape::functor).collect();
        Shape::Node(children, Arc::new(KanFunctor::new(fs)))
    }

    /// A node reusing an existing composite of the children's functors.
    pub fn node_with(children: Vec<Shape>, kf: Arc<KanFunctor>) -> Shape {
        assert_eq!(kf.seqs().len(), children.len(), "one factor per child");
        Shape::Node(children, kf)
    }

    pub fn functor(&self) -> Functor {
        match self {
            Shape::Leaf(f) => f.clone(),
            Shape::Node(_, k) => k.clone(),
        }
    }

    pub fn leaves(&self) -> Vec<Functor> {
        match self {
            Shape::Leaf(f) => vec![f.clone()],
            Shape::Node(cs, _) => cs.iter().flat_map(Shape::leaves).collect(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Shape::Leaf(_) => 1,
            Shape::Node(cs, _) => cs.iter().map(Shape::leaf_count).sum(),
        }
    }
}

/// The composite of nested limit projections
/// `shape(|S|) → (A₁⊙⋯⊙Aₙ)(c)` for an n-chain `c` over `S`.
pub fn nested_projection(shape: &Shape, c: &Chain) -> Matrix {
    match shape {
        Shape::Leaf(f) => {
            assert_eq!(c.len(), 1, "a leaf covers one level");
            Matrix::identity(f.rank(c.top().len()))
        }
        Shape::Node(children, kf) => {
            assert_eq!(c.len(), shape.leaf_count(), "chain length");
            let mut cuts = Vec::with_capacity(children.len());
            let mut acc = 0;
            for ch in children {
                acc += ch.leaf_count();
                cuts.push(acc - 1);
            }
            let cbar = c.restrict_levels(&cuts);
            let child_fs: Vec<Functor> = children.iter().map(Shape::functor).collect();
            let iota = kf.module(c.top().len()).projection(&cbar);
            let leaves = shape.leaves();
            let src_ranks = factor_ranks(&child_fs, &cbar);
            let tgt_ranks = factor_ranks(&leaves, c);
            let mut blocks = Vec::new();
            for (vi, v) in cbar.vertices().iter().enumerate() {
                let d = v.depth;
                let len = children[d].leaf_count();
                let vertex = v.elem.map(|e| (cuts[d - 1], e));
                let (sub, start, idx) = c.subtree(vertex, len);
                let mut tgt = vec![match vertex {
                    None => 0,
                    Some((j, e)) => c.vertex_index(j, e),
                }];
                for t in 0..len - 1 {
                    for &k in &idx[t] {
                        tgt.push(c.vertex_index(start + t, k));
                    }
                }
                blocks.push(Block {
                    src: vec![vi],
                    tgt,
                    matrix: nested_projection(&children[d], &sub),
                });
            }
            tensor_map(&src_ranks, &tgt_ranks, &blocks).mul(&iota)
        }
    }
}

/// The parenthesization map `shape(m) → flat(m)` into the unparenthesized
/// composite of the same leaves.
pub fn parenthesize(shape: &Shape, flat: &KanFunctor, arity: usize) -> Result<Matrix> {
    if flat.seqs().len() != shape.leaf_count() {
        return Err(Error::arg("flat composite has a different number of factors"));
    }
    let src_rank = shape.functor().rank(arity);
    flat.module(arity)
        .solve(src_rank, |c| Ok(nested_projection(shape, c)))
}

/// The map `(G₁∘̂⋯∘̂Gₖ)(m) → (H₁∘̂⋯∘̂Hₖ)(m)` induced by arity-wise maps
/// `comps[i](r): Gᵢ(r) → Hᵢ(r)`.
pub fn kan_map(
    src: &KanFunctor,
    tgt: &KanFunctor,
    comps: &[&dyn Fn(usize) -> Result<Matrix>],
    arity: usize,
) -> Result<Matrix> {
    if comps.len() != src.seqs().len() || comps.len() != tgt.seqs().len() {
        return Err(Error::arg("one component map per factor is required"));
    }
    let sm = src.module(arity);
    tgt.module(arity).solve(sm.rank(), |c| {
        let vs = c.vertices();
        let src_ranks = factor_ranks(src.seqs(), c);
        let tgt_ranks = factor_ranks(tgt.seqs(), c);
        let mut blocks = Vec::with_capacity(vs.len());
        for (i, v) in vs.iter().enumerate() {
            blocks.push(Block::single(i, i, comps[v.depth](v.fiber.len())?));
        }
        Ok(tensor_map(&src_ranks, &tgt_ranks, &blocks).mul(&sm.projection(c)))
    })
}

/// Identity component for [`kan_map`].
pub fn identity_component(f: Functor) -> impl Fn(usize) -> Result<Matrix> {
    move |r| Ok(Matrix::identity(f.rank(r)))
}

/// The associator `(X∘̂Y)∘̂Z → X∘̂(Y∘̂Z)` at `arity`, where `left` and
/// `right` are the two bracketings of the same three leaves: the unique
/// map commuting with both parenthesization maps into `X∘̂Y∘̂Z`.
pub fn associator(left: &Shape, right: &Shape, arity: usize) -> Result<Matrix> {
    let flat = KanFunctor::new(left.leaves());
    let pl = parenthesize(left, &flat, arity)?;
    let pr = parenthesize(right, &flat, arity)?;
    solve_exact(&pr, &pl).ok_or_else(|| {
        Error::structural(
            "associator",
            format!("left bracketing does not factor through the right one at arity {arity}"),
        )
    })
}

/// Mac Lane's pentagon for four sequences at every arity up to `max_set`,
/// together with whether each four-fold parenthesization map is invertible.
pub fn check_pentagon(seqs: [Functor; 4], max_set: usize, label: &str) -> Report {
    let [a, b, c, d] = seqs;
    let kf = |fs: Vec<Functor>| Arc::new(KanFunctor::new(fs));
    let leaf = |f: &Functor| Shape::leaf(f.clone());
    let ab = kf(vec![a.clone(), b.clone()]);
    let bc = kf(vec![b.clone(), c.clone()]);
    let cd = kf(vec![c.clone(), d.clone()]);
    let (abf, bcf, cdf): (Functor, Functor, Functor) = (ab.clone(), bc.clone(), cd.clone());
    let abc_l = kf(vec![abf.clone(), c.clone()]);
    let abc_r = kf(vec![a.clone(), bcf.clone()]);
    let bcd_l = kf(vec![bcf.clone(), d.clone()]);
    let bcd_r = kf(vec![b.clone(), cdf.clone()]);
    let p1 = kf(vec![abc_l.clone(), d.clone()]);
    let p2 = kf(vec![abf.clone(), cdf.clone()]);
    let p3 = kf(vec![a.clone(), bcd_r.clone()]);
    let p4 = kf(vec![abc_r.clone(), d.clone()]);
    let p5 = kf(vec![a.clone(), bcd_l.clone()]);
    let node = |cs: Vec<Shape>, k: &Arc<KanFunctor>| Shape::node_with(cs, k.clone());
    let s_ab = node(vec![leaf(&a), leaf(&b)], &ab);
    let s_bc = node(vec![leaf(&b), leaf(&c)], &bc);
    let s_cd = node(vec![leaf(&c), leaf(&d)], &cd);
    // α_{AB,C,D}: P1 → P2 and α_{A,B,CD}: P2 → P3 on opaque outer leaves.
    let e1_l = node(vec![node(vec![leaf(&abf), leaf(&c)], &abc_l), leaf(&d)], &p1);
    let e1_r = node(vec![leaf(&abf), node(vec![leaf(&c), leaf(&d)], &cd)], &p2);
    let e2_l = node(vec![node(vec![leaf(&a), leaf(&b)], &ab), leaf(&cdf)], &p2);
    let e2_r = node(vec![leaf(&a), node(vec![leaf(&b), leaf(&cdf)], &bcd_r)], &p3);
    let e4_l = node(vec![node(vec![leaf(&a), leaf(&bcf)], &abc_r), leaf(&d)], &p4);
    let e4_r = node(vec![leaf(&a), node(vec![leaf(&bcf), leaf(&d)], &bcd_l)], &p5);
    let abc_pair = (node(vec![s_ab.clone(), leaf(&c)], &abc_l), node(vec![leaf(&a), s_bc.clone()], &abc_r));
    let bcd_pair = (node(vec![s_bc.clone(), leaf(&d)], &bcd_l), node(vec![leaf(&b), s_cd.clone()], &bcd_r));
    let shapes4 = [
        node(vec![abc_pair.0.clone(), leaf(&d)], &p1),
        node(vec![s_ab.clone(), s_cd.clone()], &p2),
        node(vec![leaf(&a), bcd_pair.1.clone()], &p3),
        node(vec![abc_pair.1.clone(), leaf(&d)], &p4),
        node(vec![leaf(&a), bcd_pair.0.clone()], &p5),
    ];
    let flat = KanFunctor::new(vec![a.clone(), b.clone(), c.clone(), d.clone()]);
    let mut report = Report::new();
    for m in 0..=max_set {
        let instance = format!("{label} |S| = {m}");
        // Invertibility is observed, not required: a non-invertible
        // bracketing is reported as skipped with the bracketing named.
        for (k, sh) in shapes4.iter().enumerate() {
            let name = format!("{instance}, bracketing {k}");
            match parenthesize(sh, &flat, m) {
                Ok(p) if p.rows() == p.cols() && solve_exact(&p, &Matrix::identity(p.rows())).is_some() => {
                    report.pass("paren.iso", name)
                }
                Ok(p) => report.skip("paren.iso", name, format!("{}x{} map is not invertible", p.rows(), p.cols())),
                Err(e) => report.fail("paren.iso", name, e.to_string()),
            }
        }
        let outcome = (|| -> Result<std::result::Result<(), String>> {
            let e1 = associator(&e1_l, &e1_r, m)?;
            let e2 = associator(&e2_l, &e2_r, m)?;
            let alpha_abc = |r: usize| associator(&abc_pair.0, &abc_pair.1, r);
            let alpha_bcd = |r: usize| associator(&bcd_pair.0, &bcd_pair.1, r);
            let id_a = identity_component(a.clone());
            let id_d = identity_component(d.clone());
            let e3 = kan_map(&p1, &p4, &[&alpha_abc, &id_d], m)?;
            let e4 = associator(&e4_l, &e4_r, m)?;
            let e5 = kan_map(&p5, &p3, &[&id_a, &alpha_bcd], m)?;
            let top = e2.mul(&e1);
            let bottom = e5.mul(&e4).mul(&e3);
            if (top.rows(), top.cols()) != (bottom.rows(), bottom.cols()) {
                return Ok(Err("shapes differ".into()));
            }
            Ok(match top.first_difference(&bottom) {
                None => Ok(()),
                Some((r, col, x, y)) => Err(format!("entry ({r},{col}): {x} vs {y}")),
            })
        })();
        match outcome {
            Ok(o) => report.record("paren.pentagon", &instance, o),
            Err(e) => report.fail("paren.pentagon", &instance, e.to_string()),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wreath::permutations;

    fn arity_two(sign: i8) -> Arc<SymSeq> {
        Arc::new(
            SymSeq::from_fn(2, |n| {
                (n == 2).then(|| {
                    (
                        vec!["e".into()],
                        vec![SignedPerm {
                            images: vec![SignedImage { to: 0, sign }],
                        }],
                    )
                })
            })
            .unwrap(),
        )
    }

    fn counit() -> Functor {
        Arc::new(SymSeq::counit())
    }

    #[test]
    fn tensor_examples() {
        let u = vec![counit(), counit()];
        let c: Chain = "[x | p>x]".parse().unwrap();
        assert_eq!(eval_tensor(&u, &c).unwrap().value.rank(), 1);
        let c: Chain = "[x | p>x,q>x]".parse().unwrap();
        assert_eq!(eval_tensor(&u, &c).unwrap().value.rank(), 0);
        let a: Functor = arity_two(1);
        let c: Chain = "[x,y | p>x,q>x,r>y,s>y]".parse().unwrap();
        assert_eq!(eval_tensor(&[a.clone(), a], &c).unwrap().value.rank(), 1);
        assert!(eval_tensor(&u, &"[x]".parse().unwrap()).is_err());
    }

    #[test]
    fn unit_composite() {
        for m in 0..=3 {
            let k = KanModule::new(vec![counit(), counit()], m);
            assert_eq!(k.rank(), usize::from(m == 1));
        }
    }

    #[test]
    fn pairing_count() {
        // Four points split into two unordered pairs: three ways, for either
        // action of the swap on the outer factor.
        for sign in [1, -1] {
            let a: Functor = arity_two(sign);
            for m in 0..=4 {
                let k = KanModule::new(vec![a.clone(), a.clone()], m);
                assert_eq!(k.rank(), if m == 4 { 3 } else { 0 }, "m = {m}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let u = Arc::new(SymSeq::counit());
        assert_eq!(closed_form_compose(&u, &u, 1).rank(), 1);
        assert_eq!(compare_with_closed_form(&u, &u, 1), Ok(1));
        let a = arity_two(1);
        assert_eq!(compare_with_closed_form(&a, &a, 4), Ok(3));
        let b = Arc::new(
            SymSeq::from_fn(2, |n| match n {
                0 => Some((vec!["z".into()], vec![])),
                2 => Some((vec!["e".into()], vec![SignedPerm::identity(1)])),
                _ => None,
            })
            .unwrap(),
        );
        assert_eq!(closed_form_compose(&b, &b, 0).rank(), 2);
        assert_eq!(compare_with_closed_form(&b, &b, 0), Ok(2));
    }

    #[test]
    fn coefficient_examples() {
        let a = vec!["a".to_string()];
        assert_eq!(compose_with_coefficient(&[counit()], &a).rank(), 1);
        let two: Functor = arity_two(1);
        assert_eq!(compose_with_coefficient(&[two], &a).rank(), 1);
        let one_two: Functor = Arc::new(
            SymSeq::from_fn(2, |n| match n {
                1 => Some((vec!["u".into()], vec![])),
                2 => Some((vec!["e".into()], vec![SignedPerm::identity(1)])),
                _ => None,
            })
            .unwrap(),
        );
        assert_eq!(compose_with_coefficient(&[one_two], &a).rank(), 2);
    }

    #[test]
    fn kan_action_is_a_representation() {
        let a: Functor = arity_two(-1);
        let k = KanModule::new(vec![a.clone(), a], 4);
        for p in permutations(4) {
            for q in permutations(4) {
                let pq: Vec<usize> = q.iter().map(|&l| p[l]).collect();
                assert_eq!(k.act(&pq), k.act(&p).mul(&k.act(&q)));
            }
        }
    }

    #[test]
    fn unit_parenthesization() {
        let inner = Shape::node(vec![Shape::leaf(counit()), Shape::leaf(counit())]);
        let shape = Shape::node(vec![inner, Shape::leaf(counit())]);
        let flat = KanFunctor::new(shape.leaves());
        for m in 0..=2 {
            let p = parenthesize(&shape, &flat, m).unwrap();
            if m == 1 {
                assert!(p.is_identity());
            } else {
                assert_eq!((p.rows(), p.cols()), (0, 0));
            }
        }
    }

    #[test]
    fn tensor_map_swaps_factors() {
        let a = Matrix::identity(2);
        let b = Matrix::identity(3);
        let m = tensor_map(&[2, 3], &[3, 2], &[Block::single(0, 1, a), Block::single(1, 0, b)]);
        // e_i ⊗ f_j ↦ f_j ⊗ e_i
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(m.column_nonzeros(i * 3 + j), vec![(j * 2 + i, 1)]);
            }
        }
    }

    #[test]
    fn pentagon_for_unit_and_trees() {
        let u: Functor = Arc::new(SymSeq::counit());
        let r = check_pentagon([u.clone(), u.clone(), u.clone(), u], 3, "unit");
        assert!(r.all_pass(), "{}", r.to_text());
        assert_eq!(r.count("paren.pentagon", crate::report::Status::Pass), 4);
        let t: Functor = Arc::new(crate::graphco::graph_seq(2, false));
        let r = check_pentagon([t.clone(), t.clone(), t.clone(), t], 2, "trees");
        assert!(r.all_pass(), "{}", r.to_text());
    }
}
