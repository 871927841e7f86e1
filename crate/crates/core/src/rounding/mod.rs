//! LP solutions to posted-price policies, marking, and block composition.

mod compose;
mod extract;
mod marking;
mod policy;

pub use compose::{compose_policies, root_guard};
pub use extract::{extract_block, extract_pricing, price_for_target, Y_TOL, Z_TOL};
pub use marking::{mark_laminar, Marking, MarkingSummary};
pub use policy::{
    BlockDoc, BlockPolicy, ExecState, Guard, GuardDoc, PolicyDoc, PricingPolicy, Quote, Rule, RuleDoc, Tau,
};
