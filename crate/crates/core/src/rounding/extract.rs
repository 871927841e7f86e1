use std::collections::BTreeMap;

use super::policy::{BlockPolicy, Rule};
use crate::error::{Error, Result};
use crate::lp::{BlockLayout, BuiltLp, LpSolution};
use crate::model::DiscreteDistribution;

/// States with LP probability at or below this get an infinite price.
pub const Y_TOL: f64 = 1e-9;
/// Slack on the conditional acceptance target before a solution counts as corrupt.
pub const Z_TOL: f64 = 1e-9;

/// Lowest atom price whose strict tail does not exceed `z`, with the tie-break probability that
/// makes the acceptance probability exactly `z`.
pub fn price_for_target(d: &DiscreteDistribution, z: f64) -> Result<Rule> {
    if !(-Z_TOL..=1.0 + Z_TOL).contains(&z) {
        return Err(Error::CorruptSolution(format!(
            "conditional acceptance probability {z} outside [0,1]"
        )));
    }
    let z = z.clamp(0.0, 1.0);
    let atoms = d.atoms();
    let mut tail = 0.0;
    let mut k = atoms.len() - 1;
    // walk down while the next lower atom still keeps the strict tail within z
    while k > 0 && tail + atoms[k].prob <= z + 1e-12 {
        tail += atoms[k].prob;
        k -= 1;
    }
    let p = ((z - tail) / atoms[k].prob).clamp(0.0, 1.0);
    Ok(Rule {
        tau: atoms[k].value,
        p,
    })
}

/// Pricing rules reproducing the LP's conditional acceptance probability in every state.
pub fn extract_block(sol: &LpSolution, layout: &BlockLayout, dists: &[DiscreteDistribution]) -> Result<BlockPolicy> {
    let block = &layout.block;
    let mut rules = Vec::with_capacity(block.len());
    for pos in 0..block.len() {
        let dist = &dists[block.elements()[pos]];
        let mut map = BTreeMap::new();
        for s in &layout.layers[pos] {
            let y = sol.values[layout.y[pos][s]];
            let rule = if y <= Y_TOL {
                Rule::REJECT
            } else {
                let ex: f64 = layout.x[pos][s]
                    .iter()
                    .zip(dist.atoms())
                    .map(|(&v, a)| a.prob * sol.values[v])
                    .sum();
                price_for_target(dist, ex / y).map_err(|e| match e {
                    Error::CorruptSolution(m) => Error::CorruptSolution(format!(
                        "{m} at element {} state {s} of {}",
                        block.elements()[pos],
                        block.scope()
                    )),
                    other => other,
                })?
            };
            map.insert(s.clone(), rule);
        }
        rules.push(map);
    }
    Ok(BlockPolicy::new(block.clone(), rules))
}

/// One policy per block of a built LP.
pub fn extract_pricing(sol: &LpSolution, built: &BuiltLp) -> Result<Vec<BlockPolicy>> {
    built
        .blocks
        .iter()
        .map(|l| extract_block(sol, l, &built.dists))
        .collect()
}
