//! k-partite semialgebraic hypergraphs on rational point sets.

pub mod blowup;
pub mod families;
mod model;
mod pointset;
mod predicate;

pub use blowup::{BaseGraph, BlowupConfig, HardInstance};
pub use families::{generate, Family, PointLineLayout, PointSource, StripesConfig};
pub use model::{EdgeOracle, PartiteHypergraph, DEFAULT_TUPLE_BUDGET};
pub use pointset::PointSet;
pub use predicate::{Formula, SignPredicate, SignSet};
