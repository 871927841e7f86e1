//! Instance types, validation, conversion and state-space enumeration.

mod block;
mod distribution;
pub mod io;
mod laminar;
mod production;

pub use block::{Block, BlockScope, LocalState, Transition, DEFAULT_STATE_CAP};
pub use distribution::{Atom, DiscreteDistribution, PROB_SUM_TOL};
pub use io::{load_instance, parse_instance, Instance, InstanceDoc};
pub use laminar::{Bin, BinId, BinSpec, ElementRef, LaminarInstance, NodeSpec};
pub use production::ProductionInstance;

/// Validation entry point for either instance form; empty iff the instance is well-formed.
pub fn validate(doc: &InstanceDoc) -> Vec<String> {
    doc.violations()
}
