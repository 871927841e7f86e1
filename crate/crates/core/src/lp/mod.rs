//! LP relaxations, an in-repo simplex solver and a Lagrangian solver for large instances.

mod build;
mod decompose;
mod format;
mod model;
mod simplex;

pub use build::{build_lp_exante, build_lp_hierarchy, build_lp_optimal, BlockLayout, BuiltLp, Coupling, LpKind};
pub use decompose::{solve_decomposed, Certificate, GAP_TOL};
pub use format::{parse_lp, write_lp};
pub use model::{Constraint, LpModel, LpSolution, LpStatus, Relation, Variable};
pub use simplex::{
    solve, solve_with, PivotRule, SimplexOptions, DEFAULT_PIVOT_CAP, FEASIBILITY_TOL, OPTIMALITY_TOL, RESIDUAL_TOL,
};

use crate::error::Result;

/// Dense tableaus above this many entries go to the decomposed solver under [`LpBackend::Auto`].
pub const AUTO_DENSE_LIMIT: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LpBackend {
    Simplex,
    Decomposition,
    #[default]
    Auto,
}

/// Rough dense-tableau size of a model: rows times (columns + slacks).
pub fn tableau_size(model: &LpModel) -> usize {
    let rows = model.num_constraints()
        + model
            .variables()
            .iter()
            .filter(|v| v.upper.is_finite() && v.upper != v.lower)
            .count();
    rows.saturating_mul(model.num_vars() + rows)
}

pub fn solve_built(built: &BuiltLp, backend: LpBackend) -> Result<LpSolution> {
    let use_simplex = match backend {
        LpBackend::Simplex => true,
        LpBackend::Decomposition => false,
        LpBackend::Auto => tableau_size(&built.model) <= AUTO_DENSE_LIMIT,
    };
    if use_simplex {
        solve(&built.model)
    } else {
        Ok(solve_decomposed(built)?.0)
    }
}
