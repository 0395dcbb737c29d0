//! Shapley values of database facts with respect to inconsistency measures
//! under functional dependencies.
//!
//! The crate covers the relational model and conflict graphs, FD analysis
//! and tractability classification, exact measure evaluation, exact
//! Shapley computation (closed forms and block-tree dynamic programs),
//! a permutation-sampling estimator, and brute-force oracles.

pub mod approx;
pub mod block_tree;
pub mod combinatorics;
pub mod conflict;
pub mod error;
pub mod exact;
pub mod fd;
pub mod io;
pub mod measures;
pub mod oracle;
pub mod relational;
pub mod report;

pub use combinatorics::Rational;
pub use conflict::{ConflictGraph, ConflictGraphs};
pub use error::{Error, Result};
pub use fd::{classify, TractabilityClass};
pub use measures::MeasureKind;
pub use relational::{AttrSet, Database, Fact, FactId, Fd, FdSet, Schema};
