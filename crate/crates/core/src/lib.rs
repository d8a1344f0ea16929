//! Exact tools for semialgebraic graphs and hypergraphs: oblivious polynomial
//! partitions, homogeneity measurement, Turán and Zarankiewicz experiments,
//! Ramsey-type extraction and lower-bound certificates.
//!
//! All predicates are evaluated exactly on rational inputs. Floating point is
//! used only inside search heuristics whose results are re-validated exactly.

pub mod certificates;
pub mod error;
pub mod extremal;
pub mod graph;
pub mod hypergraph;
pub mod partition;
pub mod poly;
pub mod ramsey;
pub mod rational;
pub mod regularity;
pub mod util;

pub use error::{Error, Result};
pub use hypergraph::{Formula, PartiteHypergraph, PointSet, SignPredicate, SignSet};
pub use poly::{Polynomial, Sign};
pub use rational::Rational;

/// Identifier of the monomial order used in every serialized polynomial.
pub const MONOMIAL_ORDER: &str = "graded-lex-desc";
