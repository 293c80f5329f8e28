//! Knowledge-compilation toolkit: decision-DNNF to FBDD conversion with its
//! size statistics, exact model counting and weighted probability, the
//! formula families behind the classic FBDD lower bounds, a small
//! decision-DNNF compiler, and lineage grounding for probabilistic databases.

pub mod circuit;
pub mod compiler;
pub mod convert;
pub mod counting;
pub mod error;
pub mod formula;
pub mod generators;
pub mod io;
pub mod lineage;
pub mod oracle;

pub use circuit::{CircuitDag, DagBuilder, Flavor, Node, NodeId, Var};
pub use error::{Error, Result};
pub use formula::{CnfFormula, DnfFormula, Formula, Lit};
