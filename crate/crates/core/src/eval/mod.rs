//! Monte Carlo simulation, exact policy evaluation, prophet benchmark and dependency checks.

mod dependency;
mod exact;
mod prophet;
pub mod rng;
mod search;
mod simulate;
mod stats;

pub use dependency::{acceptance_law, check_negative_cylinder, CylinderReport, MAX_CYLINDER_ELEMENTS};
pub use exact::{evaluate_block, evaluate_exact, ExactEvaluation};
pub use prophet::{offline_optimum, prophet_exact, prophet_value, ProphetEstimate};
pub use search::{conditional_prices, search_dependency_counterexample, Hit, SearchOutcome, SearchSpace, PRICE_MARGIN};
pub use simulate::{simulate, BinViolations, SimulationReport, CHUNK};
pub use stats::Moments;
