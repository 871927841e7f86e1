//! Parameter schedule and orchestration: pick the exact or the relaxed route, solve, round,
//! compose.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{build_lp_exante, build_lp_hierarchy, build_lp_optimal, solve_built, BuiltLp, LpBackend, LpSolution};
use crate::model::{LaminarInstance, ProductionInstance, DEFAULT_STATE_CAP};
use crate::rounding::{
    compose_policies, extract_pricing, mark_laminar, root_guard, Marking, MarkingSummary, PricingPolicy,
};

/// `ε² / ln(1/ε)`.
pub fn delta_of(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.99) {
        return Err(Error::Config(format!("epsilon {epsilon} outside (0, 0.99)")));
    }
    Ok(epsilon * epsilon / (1.0 / epsilon).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtasConfig {
    pub epsilon: f64,
    /// Replaces `delta_of(epsilon)` when set.
    pub delta_override: Option<f64>,
    pub state_cap: usize,
    pub backend: LpBackend,
}

impl PtasConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            delta_override: None,
            state_cap: DEFAULT_STATE_CAP,
            backend: LpBackend::Auto,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta_override = Some(delta);
        self
    }

    pub fn delta(&self) -> Result<f64> {
        let d = delta_of(self.epsilon)?;
        match self.delta_override {
            None => Ok(d),
            Some(o) if o > 0.0 && o < 1.0 => Ok(o),
            Some(o) => Err(Error::Config(format!("delta {o} outside (0, 1)"))),
        }
    }

    pub fn capacity_scale(&self) -> f64 {
        1.0 - self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Exact optimal policy from the full LP.
    Small,
    /// Relaxed LP at scaled capacities, rounded block-wise and guarded.
    Large,
}

#[derive(Debug, Clone)]
pub struct PtasOutcome {
    pub policy: PricingPolicy,
    pub branch: Branch,
    pub lp_objective: f64,
    pub delta: f64,
    pub marking: Option<MarkingSummary>,
    pub built: BuiltLp,
    pub solution: LpSolution,
}

fn solve_and_extract(built: &BuiltLp, backend: LpBackend) -> Result<(LpSolution, Vec<crate::rounding::BlockPolicy>)> {
    let sol = solve_built(built, backend)?;
    let policies = extract_pricing(&sol, built)?;
    Ok((sol, policies))
}

pub fn ptas_production(p: &ProductionInstance, cfg: &PtasConfig) -> Result<PtasOutcome> {
    let delta = cfg.delta()?;
    let lam = p.to_laminar()?;
    if p.shipping as f64 <= 1.0 / delta {
        let built = build_lp_optimal(&lam, cfg.state_cap)?;
        let (solution, policies) = solve_and_extract(&built, cfg.backend)?;
        let policy = PricingPolicy::new(p.num_buyers(), policies, Vec::new())?;
        return Ok(PtasOutcome {
            policy,
            branch: Branch::Small,
            lp_objective: solution.objective,
            delta,
            marking: None,
            built,
            solution,
        });
    }
    let built = build_lp_exante(p, cfg.capacity_scale(), cfg.state_cap)?;
    let (solution, policies) = solve_and_extract(&built, cfg.backend)?;
    let policy = PricingPolicy::new(p.num_buyers(), policies, vec![root_guard(&lam, p.shipping)])?;
    Ok(PtasOutcome {
        policy,
        branch: Branch::Large,
        lp_objective: solution.objective,
        delta,
        marking: None,
        built,
        solution,
    })
}

pub fn ptas_laminar(inst: &LaminarInstance, cfg: &PtasConfig) -> Result<PtasOutcome> {
    let delta = cfg.delta()?;
    let mk = mark_laminar(inst, delta)?;
    ptas_laminar_marked(inst, &mk, cfg, delta)
}

/// Same as [`ptas_laminar`] for a caller-chosen marking.
pub fn ptas_laminar_marked(inst: &LaminarInstance, mk: &Marking, cfg: &PtasConfig, delta: f64) -> Result<PtasOutcome> {
    let built = build_lp_hierarchy(inst, mk, cfg.capacity_scale(), cfg.state_cap)?;
    let (solution, policies) = solve_and_extract(&built, cfg.backend)?;
    let policy = compose_policies(inst, mk, policies)?;
    Ok(PtasOutcome {
        policy,
        branch: if mk.large().is_empty() { Branch::Small } else { Branch::Large },
        lp_objective: solution.objective,
        delta,
        marking: Some(mk.summary()),
        built,
        solution,
    })
}
