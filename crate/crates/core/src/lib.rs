//! Exact integer computations with cooperads presented as symmetric sequences.
//!
//! The crate is layered bottom-up:
//!
//! - [`wreath`]: finite sets, chains of set maps (labeled level trees), their
//!   face/degeneracy/leaf operations and canonical forms.
//! - [`zmodule`]: free ℤ-modules, integer matrices, signed permutation actions
//!   and invariant sublattices.
//! - [`symseq`]: symmetric sequences with Σₙ-actions.
//! - [`compose`]: the tree-functor product, its right Kan extension along the
//!   leaf functor, the closed-form oracle and parenthesization maps.
//! - [`cooperad`]: cocompositions, coface/codegeneracy maps, comodules,
//!   coalgebras and the verification suites.
//! - [`graphco`] and [`cdc`]: the graph, directed graph and Δ-complex cooperads.
//! - [`cli`]: the batch command-line interface.

pub mod cdc;
pub mod cli;
pub mod compose;
pub mod cooperad;
pub mod corpus;
pub mod error;
pub mod graphco;
pub mod report;
pub mod symseq;
pub mod wreath;
pub mod zmodule;

pub use error::{Error, Result};
