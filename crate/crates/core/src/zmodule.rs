//! Exact linear algebra over ℤ.
//!
//! Free modules carry an ordered basis of structural tags; maps between them
//! are integer matrices. Invariant submodules are computed as saturated
//! integer kernels and returned in Hermite normal form so that two routes to
//! the same lattice can be compared entry by entry.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>], cols: usize) -> Self {
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged row");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<i64>], rows: usize) -> Self {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged column");
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row(&self, r: usize) -> &[i64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Nonzero entries of column `c` as `(row, value)`.
    pub fn column_nonzeros(&self, c: usize) -> Vec<(usize, i64)> {
        (0..self.rows)
            .filter_map(|r| {
                let v = self.get(r, c);
                (v != 0).then_some((r, v))
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| self.get(i, j) == i64::from(i == j)))
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, rhs.rows,
            "dimension mismatch {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    if b != 0 {
                        *o += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, k: i64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * k).collect(),
        }
    }

    /// Kronecker product; row and column indices are lexicographic with the
    /// left factor most significant.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.set(i * rhs.rows + k, j * rhs.cols + l, a * rhs.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn vstack(blocks: &[Matrix], cols: usize) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            assert_eq!(b.cols, cols);
            data.extend_from_slice(&b.data);
        }
        Matrix { rows, cols, data }
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        let mut entries = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if v != 0 {
                    entries.push((i, j, v));
                }
            }
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    /// First position where two equally shaped matrices differ.
    pub fn first_difference(&self, other: &Matrix) -> Option<(usize, usize, i64, i64)> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Some((self.rows, self.cols, other.rows as i64, other.cols as i64));
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) != other.get(i, j) {
                    return Some((i, j, self.get(i, j), other.get(i, j)));
                }
            }
        }
        None
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// JSON form of a matrix: dimensions plus `(row, col, value)` triplets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, i64)>,
}

impl SparseMatrix {
    pub fn to_dense(&self) -> Result<Matrix> {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            if r >= self.rows || c >= self.cols {
                return Err(Error::parse(
                    format!("entry ({r},{c})"),
                    format!("outside {}x{} matrix", self.rows, self.cols),
                ));
            }
            m.add_to(r, c, v);
        }
        Ok(m)
    }
}

/// A permutation of basis vectors with signs: basis vector `j` is sent to
/// `sign * e[to]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedPerm {
    pub images: Vec<SignedImage>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedImage {
    pub to: usize,
    pub sign: i8,
}

impl SignedPerm {
    pub fn identity(n: usize) -> Self {
        SignedPerm {
            images: (0..n).map(|to| SignedImage { to, sign: 1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        for img in &self.images {
            if img.to >= n || seen[img.to] {
                return Err(Error::arg(format!(
                    "signed permutation is not a bijection on {n} basis vectors"
                )));
            }
            if img.sign != 1 && img.sign != -1 {
                return Err(Error::arg(format!("sign {} is not ±1", img.sign)));
            }
            seen[img.to] = true;
        }
        Ok(())
    }

    /// `self ∘ rhs`: apply `rhs` first.
    pub fn compose(&self, rhs: &SignedPerm) -> SignedPerm {
        assert_eq!(self.len(), rhs.len());
        SignedPerm {
            images: rhs
                .images
                .iter()
                .map(|r| {
                    let s = self.images[r.to];
                    SignedImage {
                        to: s.to,
                        sign: s.sign * r.sign,
                    }
                })
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(j, img)| img.to == j && img.sign == 1)
    }

    pub fn to_matrix(&self) -> Matrix {
        let n = self.len();
        let mut m = Matrix::zeros(n, n);
        for (j, img) in self.images.iter().enumerate() {
            m.set(img.to, j, i64::from(img.sign));
        }
        m
    }
}

/// Structural basis tag of a free module.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// The basis vector of the monoidal unit.
    Unit,
    Named(String),
    Word(Vec<Tag>),
    /// Provenance-tagged element of a finite product.
    Summand(usize, Box<Tag>),
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Unit => write!(f, "1"),
            Tag::Named(s) => write!(f, "{s}"),
            Tag::Word(ws) => {
                write!(f, "(")?;
                for (i, w) in ws.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ⊗ ")?;
                    }
                    write!(f, "{w}")?;
                }
                write!(f, ")")
            }
            Tag::Summand(i, t) => write!(f, "#{i}:{t}"),
        }
    }
}

/// Finitely generated free ℤ-module with an ordered basis of distinct tags.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FreeMod {
    basis: Vec<Tag>,
}

impl FreeMod {
    pub fn new(basis: Vec<Tag>) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &basis {
            if !seen.insert(t) {
                return Err(Error::arg(format!("duplicate basis tag {t}")));
            }
        }
        Ok(FreeMod { basis })
    }

    /// The zero module; the final object of the ambient category.
    pub fn zero() -> Self {
        FreeMod { basis: Vec::new() }
    }

    /// The monoidal unit: rank one on the reserved unit tag.
    pub fn unit() -> Self {
        FreeMod {
            basis: vec![Tag::Unit],
        }
    }

    pub fn named(rank: usize, prefix: &str) -> Self {
        FreeMod {
            basis: (0..rank).map(|i| Tag::Named(format!("{prefix}{i}"))).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Tag] {
        &self.basis
    }
}

/// A ℤ-linear map between free modules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinMap {
    pub dom: FreeMod,
    pub cod: FreeMod,
    pub matrix: Matrix,
}

impl LinMap {
    pub fn new(dom: FreeMod, cod: FreeMod, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != cod.rank() || matrix.cols() != dom.rank() {
            return Err(Error::arg(format!(
                "matrix {}x{} does not fit {} -> {}",
                matrix.rows(),
                matrix.cols(),
                dom.rank(),
                cod.rank()
            )));
        }
        Ok(LinMap { dom, cod, matrix })
    }

    pub fn identity(m: &FreeMod) -> Self {
        LinMap {
            dom: m.clone(),
            cod: m.clone(),
            matrix: Matrix::identity(m.rank()),
        }
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &LinMap) -> Result<LinMap> {
        if first.cod != self.dom {
            return Err(Error::arg("composing maps with mismatched modules"));
        }
        Ok(LinMap {
            dom: first.dom.clone(),
            cod: self.cod.clone(),
            matrix: self.matrix.mul(&first.matrix),
        })
    }
}

/// Tensor product of free modules. The basis is ordered pairs in
/// lexicographic order; tensoring with the unit reuses the other factor's
/// tags so the unit isomorphisms are identity matrices.
pub fn tensor(m: &FreeMod, n: &FreeMod) -> FreeMod {
    if m.basis == [Tag::Unit] {
        return n.clone();
    }
    if n.basis == [Tag::Unit] {
        return m.clone();
    }
    let mut basis = Vec::with_capacity(m.rank() * n.rank());
    for a in &m.basis {
        for b in &n.basis {
            basis.push(Tag::Word(vec![a.clone(), b.clone()]));
        }
    }
    FreeMod { basis }
}

pub fn tensor_maps(f: &LinMap, g: &LinMap) -> LinMap {
    LinMap {
        dom: tensor(&f.dom, &g.dom),
        cod: tensor(&f.cod, &g.cod),
        matrix: f.matrix.kron(&g.matrix),
    }
}

/// Finite product (= direct sum) with its projections and injections.
pub struct Product {
    pub module: FreeMod,
    pub projections: Vec<LinMap>,
    pub injections: Vec<LinMap>,
}

pub fn finite_product(factors: &[FreeMod]) -> Product {
    let total: usize = factors.iter().map(FreeMod::rank).sum();
    let mut basis = Vec::with_capacity(total);
    for (i, f) in factors.iter().enumerate() {
        basis.extend(f.basis.iter().map(|t| Tag::Summand(i, Box::new(t.clone()))));
    }
    let module = FreeMod { basis };
    let mut projections = Vec::new();
    let mut injections = Vec::new();
    let mut offset = 0;
    for f in factors {
        let mut p = Matrix::zeros(f.rank(), total);
        for k in 0..f.rank() {
            p.set(k, offset + k, 1);
        }
        injections.push(LinMap {
            dom: f.clone(),
            cod: module.clone(),
            matrix: p.transpose(),
        });
        projections.push(LinMap {
            dom: module.clone(),
            cod: f.clone(),
            matrix: p,
        });
        offset += f.rank();
    }
    Product {
        module,
        projections,
        injections,
    }
}

/// A finite group given by its multiplication table, acting on a basis by
/// signed permutations.
#[derive(Clone, Debug)]
pub struct SignedPermAction {
    /// `table[g][h]` is the index of `g·h`.
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub rep: Vec<SignedPerm>,
}

impl SignedPermAction {
    pub fn trivial(rank: usize) -> Self {
        SignedPermAction {
            table: vec![vec![0]],
            identity: 0,
            rep: vec![SignedPerm::identity(rank)],
        }
    }

    /// Group generated by `gens`, closed under composition.
    pub fn generated(rank: usize, gens: &[SignedPerm]) -> Self {
        let mut elems = vec![SignedPerm::identity(rank)];
        let mut index: BTreeMap<Vec<(usize, i8)>, usize> = BTreeMap::new();
        let key = |p: &SignedPerm| p.images.iter().map(|i| (i.to, i.sign)).collect::<Vec<_>>();
        index.insert(key(&elems[0]), 0);
        let mut frontier = 0;
        while frontier < elems.len() {
            let g = elems[frontier].clone();
            for s in gens {
                let h = s.compose(&g);
                let k = key(&h);
                if !index.contains_key(&k) {
                    index.insert(k, elems.len());
                    elems.push(h);
                }
            }
            frontier += 1;
        }
        let table = elems
            .iter()
            .map(|g| elems.iter().map(|h| index[&key(&g.compose(h))]).collect())
            .collect();
        SignedPermAction {
            table,
            identity: 0,
            rep: elems,
        }
    }

    /// Checks that `rep` is a homomorphism for the multiplication table.
    pub fn validate(&self) -> Result<()> {
        let n = self.rep.len();
        if self.table.len() != n || self.table.iter().any(|r| r.len() != n) {
            return Err(Error::arg("multiplication table has wrong shape"));
        }
        if !self.rep[self.identity].is_identity() {
            return Err(Error::arg("identity element does not act trivially"));
        }
        for g in 0..n {
            self.rep[g].validate()?;
            for h in 0..n {
                if self.rep[g].compose(&self.rep[h]) != self.rep[self.table[g][h]] {
                    return Err(Error::arg(format!("rep({g})·rep({h}) ≠ rep({g}{h})")));
                }
            }
        }
        Ok(())
    }
}

/// Invariant submodule of `m` under `act`, with its inclusion. The returned
/// basis is the Hermite normal form of the invariant lattice.
pub fn fixed_submodule(m: &FreeMod, act: &SignedPermAction) -> Result<(FreeMod, LinMap)> {
    if act.rep.iter().any(|r| r.len() != m.rank()) {
        return Err(Error::arg("action rank does not match module rank"));
    }
    let mats: Vec<Matrix> = act.rep.iter().map(SignedPerm::to_matrix).collect();
    let lattice = Lattice::invariants(m.rank(), &mats);
    let incl = lattice.inclusion();
    let sub = FreeMod {
        basis: (0..lattice.rank())
            .map(|j| Tag::Named(format!("fix{j}")))
            .collect(),
    };
    let map = LinMap::new(sub.clone(), m.clone(), incl)?;
    Ok((sub, map))
}

/// Row Hermite normal form of the lattice spanned by `rows` (each of length
/// `ncols`): echelon rows with positive pivots and entries above each pivot
/// reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hermite_rows(mut rows: Vec<Vec<i64>>, ncols: usize) -> Vec<Vec<i64>> {
    let rank = echelonize(&mut rows, ncols);
    rows.truncate(rank);
    let pivots: Vec<usize> = rows
        .iter()
        .map(|r| r.iter().position(|&v| v != 0).expect("nonzero row"))
        .collect();
    for (i, &p) in pivots.iter().enumerate() {
        for k in 0..i {
            let q = rows[k][p].div_euclid(rows[i][p]);
            if q != 0 {
                let (head, tail) = rows.split_at_mut(i);
                axpy(&mut head[k], -q, &tail[0]);
            }
        }
    }
    rows
}

/// Brings the first `ncols` columns of `rows` into echelon form with
/// unimodular row operations applied to entire rows. Returns the number of
/// pivot rows; rows below that are zero in the first `ncols` entries.
fn echelonize(rows: &mut [Vec<i64>], ncols: usize) -> usize {
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows.len() {
                if rows[i][c] != 0
                    && best.is_none_or(|b| rows[i][c].abs() < rows[b][c].abs())
                {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            rows.swap(r, b);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c] != 0 {
                    let q = rows[i][c].div_euclid(rows[r][c]);
                    let (head, tail) = rows.split_at_mut(i);
                    axpy(&mut tail[0], -q, &head[r]);
                    if rows[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if r < rows.len() && rows[r][c] != 0 {
            if rows[r][c] < 0 {
                for v in rows[r].iter_mut() {
                    *v = -*v;
                }
            }
            r += 1;
        }
    }
    r
}

fn axpy(y: &mut [i64], a: i64, x: &[i64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Saturated integer kernel of `m` (vectors `x` with `m·x = 0`), in Hermite
/// normal form.
pub fn integer_kernel(m: &Matrix) -> Vec<Vec<i64>> {
    let n = m.cols();
    let rows_m = m.rows();
    // Row j of the augmented system is (column j of m | e_j).
    let mut aug: Vec<Vec<i64>> = (0..n)
        .map(|j| {
            let mut v = m.column(j);
            v.extend((0..n).map(|k| i64::from(k == j)));
            v
        })
        .collect();
    let rank = echelonize(&mut aug, rows_m);
    let kernel: Vec<Vec<i64>> = aug[rank..].iter().map(|r| r[rows_m..].to_vec()).collect();
    hermite_rows(kernel, n)
}

/// The unique integer `X` with `a·X = b`, when `a` has full column rank and
/// such an `X` exists.
pub fn solve_exact(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    assert_eq!(a.rows(), b.rows(), "row counts");
    let (r, s) = (a.cols(), b.cols());
    let mut aug: Vec<Vec<i64>> = (0..a.rows())
        .map(|i| a.row(i).iter().chain(b.row(i)).copied().collect())
        .collect();
    if echelonize(&mut aug, r) < r || aug[r..].iter().any(|row| row[r..].iter().any(|&v| v != 0)) {
        return None;
    }
    let mut x = Matrix::zeros(r, s);
    for col in 0..s {
        for i in (0..r).rev() {
            let mut v = aug[i][r + col];
            for j in i + 1..r {
                v -= aug[i][j] * x.get(j, col);
            }
            if v % aug[i][i] != 0 {
                return None;
            }
            x.set(i, col, v / aug[i][i]);
        }
    }
    Some(x)
}

/// Smith invariant factors (nonzero diagonal entries, ascending divisibility).
pub fn smith_invariants(m: &Matrix) -> Vec<i64> {
    let mut a: Vec<Vec<i64>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
    let (rows, cols) = (m.rows(), m.cols());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pivot: smallest nonzero entry in the remaining block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            let q = a[i][t].div_euclid(a[t][t]);
            if q != 0 {
                let (head, tail) = a.split_at_mut(i);
                axpy(&mut tail[0], -q, &head[t]);
            }
            if a[i][t] != 0 {
                clean = false;
            }
        }
        for j in t + 1..cols {
            let q = a[t][j].div_euclid(a[t][t]);
            if q != 0 {
                for row in a.iter_mut() {
                    row[j] -= q * row[t];
                }
            }
            if a[t][j] != 0 {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // Enforce divisibility of the remaining block.
        let p = a[t][t];
        let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0));
        if let Some(i) = bad {
            let (head, tail) = a.split_at_mut(i);
            axpy(&mut head[t], 1, &tail[0]);
            continue;
        }
        diag.push(p.abs());
        t += 1;
    }
    diag
}

/// A sublattice of ℤⁿ held in Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<i64>>,
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn from_generators(dim: usize, gens: Vec<Vec<i64>>) -> Self {
        let basis = hermite_rows(gens, dim);
        let pivots = basis
            .iter()
            .map(|r| r.iter().position(|&v| v != 0).expect("nonzero row"))
            .collect();
        Lattice { dim, basis, pivots }
    }

    pub fn full(dim: usize) -> Self {
        Lattice {
            dim,
            basis: (0..dim)
                .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
                .collect(),
            pivots: (0..dim).collect(),
        }
    }

    /// Vectors fixed by every matrix in `actions`.
    pub fn invariants(dim: usize, actions: &[Matrix]) -> Self {
        let moving: Vec<Matrix> = actions
            .iter()
            .filter(|g| !g.is_identity())
            .map(|g| g.sub(&Matrix::identity(dim)))
            .collect();
        if moving.is_empty() {
            return Lattice::full(dim);
        }
        let stacked = Matrix::vstack(&moving, dim);
        Lattice::from_generators(dim, integer_kernel(&stacked))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    /// Inclusion matrix: the basis vectors as columns.
    pub fn inclusion(&self) -> Matrix {
        Matrix::from_columns(&self.basis, self.dim)
    }

    /// Coordinates of `v` in the lattice basis, if `v` lies in the lattice.
    pub fn coords(&self, v: &[i64]) -> Option<Vec<i64>> {
        let mut rest = v.to_vec();
        let mut out = Vec::with_capacity(self.basis.len());
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if rest[..p].iter().any(|&x| x != 0) {
                return None;
            }
            if rest[p] % b[p] != 0 {
                return None;
            }
            let x = rest[p] / b[p];
            axpy(&mut rest, -x, b);
            out.push(x);
        }
        rest.iter().all(|&x| x == 0).then_some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap_action(sign: i8) -> SignedPermAction {
        let g = SignedPerm {
            images: vec![SignedImage { to: 1, sign }, SignedImage { to: 0, sign }],
        };
        SignedPermAction::generated(2, &[g])
    }

    #[test]
    fn tensor_ranks() {
        let m = FreeMod::named(2, "m");
        let n = FreeMod::named(3, "n");
        assert_eq!(tensor(&m, &n).rank(), 6);
        assert_eq!(tensor(&m, &FreeMod::zero()).rank(), 0);
        let u = tensor(&m, &FreeMod::unit());
        assert_eq!(u, m);
        let id = LinMap::identity(&m);
        assert!(tensor_maps(&id, &LinMap::identity(&FreeMod::unit())).matrix.is_identity());
    }

    #[test]
    fn fixed_swap() {
        let m = FreeMod::named(2, "e");
        let (sub, incl) = fixed_submodule(&m, &swap_action(1)).unwrap();
        assert_eq!(sub.rank(), 1);
        assert_eq!(incl.matrix.column(0), vec![1, 1]);
    }

    #[test]
    fn fixed_signed_swap() {
        let m = FreeMod::named(2, "e");
        let act = swap_action(-1);
        act.validate().unwrap();
        let (sub, incl) = fixed_submodule(&m, &act).unwrap();
        assert_eq!(sub.rank(), 1);
        assert_eq!(incl.matrix.column(0), vec![1, -1]);
    }

    #[test]
    fn fixed_sign_on_rank_one_is_zero() {
        let g = SignedPerm {
            images: vec![SignedImage { to: 0, sign: -1 }],
        };
        let act = SignedPermAction::generated(1, &[g]);
        let (sub, _) = fixed_submodule(&FreeMod::named(1, "e"), &act).unwrap();
        assert_eq!(sub.rank(), 0);
    }

    #[test]
    fn fixed_trivial_is_everything() {
        let m = FreeMod::named(3, "e");
        let (sub, incl) = fixed_submodule(&m, &SignedPermAction::trivial(3)).unwrap();
        assert_eq!(sub.rank(), 3);
        assert!(incl.matrix.is_identity());
    }

    #[test]
    fn product_biproduct_identities() {
        let fs = [FreeMod::named(1, "a"), FreeMod::zero(), FreeMod::named(2, "b")];
        let p = finite_product(&fs);
        assert_eq!(p.module.rank(), 3);
        assert_eq!(p.projections.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let c = p.projections[i].compose(&p.injections[j]).unwrap();
                if i == j {
                    assert!(c.matrix.is_identity());
                } else {
                    assert!(c.matrix.is_zero());
                }
            }
        }
        assert_eq!(finite_product(&[]).module.rank(), 0);
    }

    #[test]
    fn kernel_and_coords() {
        let m = Matrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6]], 3);
        let k = integer_kernel(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            let col = Matrix::from_columns(&[v.clone()], 3);
            assert!(m.mul(&col).is_zero());
        }
        let lat = Lattice::from_generators(3, k);
        assert!(lat.coords(&[-2, 1, 0]).is_some());
        assert!(lat.coords(&[1, 0, 0]).is_none());
    }

    #[test]
    fn kernel_is_saturated() {
        // 2x = 0 over ℤ² in the first coordinate only.
        let m = Matrix::from_rows(&[vec![2, 0]], 2);
        assert_eq!(integer_kernel(&m), vec![vec![0, 1]]);
        let m = Matrix::from_rows(&[vec![2, -2]], 2);
        assert_eq!(integer_kernel(&m), vec![vec![1, 1]]);
    }

    #[test]
    fn smith_of_small_matrices() {
        assert_eq!(smith_invariants(&Matrix::from_rows(&[vec![2, 0], vec![0, 3]], 2)), vec![1, 6]);
        assert_eq!(smith_invariants(&Matrix::from_rows(&[vec![1, -1], vec![-1, 1]], 2)), vec![1]);
        assert!(smith_invariants(&Matrix::zeros(2, 2)).is_empty());
    }

    #[test]
    fn corrupted_action_rejected() {
        let mut act = swap_action(1);
        act.rep[1].images[0].sign = -1;
        assert!(act.validate().is_err());
    }

    #[test]
    fn solve_exact_detects_non_integral_and_inconsistent() {
        let a = Matrix::from_rows(&[vec![2], vec![0]], 1);
        assert_eq!(solve_exact(&a, &Matrix::from_rows(&[vec![4], vec![0]], 1)), Some(Matrix::from_rows(&[vec![2]], 1)));
        assert_eq!(solve_exact(&a, &Matrix::from_rows(&[vec![3], vec![0]], 1)), None);
        assert_eq!(solve_exact(&a, &Matrix::from_rows(&[vec![2], vec![1]], 1)), None);
    }
}
