//! Python bindings for coopkit.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use coopkit::cdc::{dim1_matches_graph, verify_cdc};
use coopkit::compose::{compare_with_closed_form, Functor, KanFunctor};
use coopkit::cooperad::{check_delta_n, verify_comodule, verify_cooperad, verify_cosimplicial, Comodule, Cooperad, Tower};
use coopkit::graphco::{enumerate_trees, BasisGraph, Corruption};
use coopkit::symseq::SymFunctor;
use coopkit::wreath::{Chain, FinSet};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A verification report.
#[pyclass(frozen)]
pub struct Report {
    inner: coopkit::report::Report,
}

#[pymethods]
impl Report {
    fn all_pass(&self) -> bool {
        self.inner.all_pass()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable")
    }

    /// `(check, instance, witness)` for every failure.
    fn failures(&self) -> Vec<(String, String, String)> {
        self.inner
            .failures()
            .map(|e| (e.check.clone(), e.instance.clone(), e.witness.clone().unwrap_or_default()))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.entries.len()
    }
}

fn report(inner: coopkit::report::Report) -> Report {
    Report { inner }
}

/// A symmetric sequence with signed permutation actions.
#[pyclass(frozen)]
pub struct SymSeq {
    inner: Arc<coopkit::symseq::SymSeq>,
}

#[pymethods]
impl SymSeq {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(SymSeq {
            inner: Arc::new(coopkit::symseq::SymSeq::from_json(text).map_err(err)?),
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn rank(&self, arity: usize) -> usize {
        self.inner.rank(arity)
    }

    /// The action of a permutation as a list of rows.
    fn act(&self, perm: Vec<usize>) -> Vec<Vec<i64>> {
        rows(&self.inner.act(&perm))
    }
}

fn rows(m: &coopkit::zmodule::Matrix) -> Vec<Vec<i64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Rank of the composite of `seqs` (outermost first) at `arity`.
#[pyfunction]
fn compose_rank(seqs: Vec<Bound<'_, SymSeq>>, arity: usize) -> usize {
    let fs: Vec<Functor> = seqs.iter().map(|s| s.get().inner.clone() as Functor).collect();
    KanFunctor::new(fs).rank(arity)
}

/// Compares the composite of two sequences with the closed form; returns
/// the common rank.
#[pyfunction]
fn compare_closed_form(a: &Bound<'_, SymSeq>, b: &Bound<'_, SymSeq>, arity: usize) -> PyResult<usize> {
    compare_with_closed_form(&a.get().inner, &b.get().inner, arity).map_err(PyValueError::new_err)
}

/// The graph cooperad of trees, optionally directed or corrupted.
#[pyclass(frozen)]
pub struct GraphCooperad {
    inner: Arc<coopkit::graphco::GraphCooperad>,
}

#[pymethods]
impl GraphCooperad {
    /// `corrupt` is one of `"sign-flip"`, `"dropped-zero-case"`,
    /// `"wrong-counit"`.
    #[new]
    #[pyo3(signature = (max_arity, directed = false, corrupt = None, seed = 0))]
    fn new(max_arity: usize, directed: bool, corrupt: Option<&str>, seed: u64) -> PyResult<Self> {
        let base = coopkit::graphco::GraphCooperad::new(max_arity, directed);
        let inner = match corrupt {
            None => base,
            Some("dropped-zero-case") => base.corrupted(Corruption::DroppedZeroCase),
            Some("wrong-counit") => base.corrupted(Corruption::WrongCounit),
            Some(name @ "sign-flip") => {
                let (_, op) = coopkit::corpus::negative_controls(seed, max_arity)
                    .into_iter()
                    .find(|(n, _)| *n == name)
                    .expect("generated");
                base.corrupted(op.corruption.expect("corrupted"))
            }
            Some(other) => return Err(err(format!("unknown corruption {other:?}"))),
        };
        Ok(GraphCooperad { inner: Arc::new(inner) })
    }

    fn rank(&self, arity: usize) -> usize {
        self.inner.symseq().rank(arity)
    }

    /// Basis graphs in arity `n`.
    fn basis(&self, n: usize) -> Vec<String> {
        self.inner.symseq().basis(n).to_vec()
    }

    /// The cocomposition matrix at a 2-chain such as `"[1,2 | 1>1,2>1,3>2]"`.
    fn cocomp(&self, chain: &str) -> PyResult<Vec<Vec<i64>>> {
        let c: Chain = chain.parse().map_err(err)?;
        Ok(rows(&self.inner.cocomp(&c).map_err(err)?))
    }

    fn verify(&self, max_set: usize) -> Report {
        report(verify_cooperad(self.inner.clone(), max_set))
    }

    fn verify_cosimplicial(&self, max_n: usize, max_set: usize) -> Report {
        report(verify_cosimplicial(&Tower::new(self.inner.clone()), max_n, max_set))
    }

    /// Comodule axioms and `Δ^[n]` path independence for a coalgebra JSON
    /// document.
    fn verify_coalgebra(&self, coalgebra_json: &str, max_n: usize, max_set: usize) -> PyResult<Report> {
        let op: Arc<dyn Cooperad> = self.inner.clone();
        let module: Arc<dyn Comodule> =
            Arc::new(coopkit::cli::load_coalgebra("coalgebra", op.as_ref(), coalgebra_json).map_err(err)?);
        let mut r = verify_comodule(op.clone(), module.clone(), max_set);
        r.extend(check_delta_n(&Tower::with_module(op, module), max_n, 0));
        Ok(report(r))
    }
}

/// Checks of the contractible Δ-complex cooperad with at most `max_tri`
/// triangles, including the comparison of its 1-dimensional part with trees.
#[pyfunction]
#[pyo3(signature = (max_set, max_tri = 1))]
fn verify_complexes(max_set: usize, max_tri: usize) -> Report {
    let mut r = verify_cdc(max_set, max_tri);
    r.extend(dim1_matches_graph(max_set, max_tri));
    report(r)
}

/// Trees on `{1..n}` in basis order.
#[pyfunction]
fn trees(n: usize) -> Vec<String> {
    enumerate_trees(n)
        .iter()
        .map(|t| BasisGraph::from_tree(&FinSet::standard(n), t).to_string())
        .collect()
}

/// Runs the command-line interface and returns its exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    coopkit::cli::run(std::iter::once("coopkit".to_string()).chain(args))
}

#[pymodule]
fn coopkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Report>()?;
    m.add_class::<SymSeq>()?;
    m.add_class::<GraphCooperad>()?;
    m.add_function(wrap_pyfunction!(compose_rank, m)?)?;
    m.add_function(wrap_pyfunction!(compare_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(verify_complexes, m)?)?;
    m.add_function(wrap_pyfunction!(trees, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
