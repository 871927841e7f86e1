//! Exact Bellman recursions over block state spaces.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::{Block, BlockScope, DiscreteDistribution, LaminarInstance, LocalState, ProductionInstance};
use crate::rounding::{BlockPolicy, PricingPolicy, Rule};

/// Expected future welfare for every reachable state of a block, before each arrival and at
/// the end. States missing from a layer are infeasible (value −∞).
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    scope: BlockScope,
    shift: f64,
    elements: Vec<usize>,
    layers: Vec<BTreeMap<LocalState, f64>>,
}

impl ValueTable {
    pub fn scope(&self) -> BlockScope {
        self.scope
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Number of arrivals; layers run from 0 to this value inclusive.
    pub fn horizon(&self) -> usize {
        self.elements.len()
    }

    pub fn layer(&self, pos: usize) -> &BTreeMap<LocalState, f64> {
        &self.layers[pos]
    }

    /// `None` for infeasible or unreachable states.
    pub fn value(&self, pos: usize, state: &LocalState) -> Option<f64> {
        self.layers[pos].get(state).copied()
    }

    /// Value of the initial state before the first arrival.
    pub fn initial_value(&self) -> f64 {
        *self.layers[0].values().next().expect("layer 0 holds the initial state")
    }

    /// Overwrites one entry; meant for building negative controls.
    pub fn set(&mut self, pos: usize, state: LocalState, value: f64) {
        self.layers[pos].insert(state, value);
    }

    /// Debug view keyed by `"t,state"`, `t` the arriving element (or `end`).
    pub fn to_debug_map(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for (pos, layer) in self.layers.iter().enumerate() {
            let t = self
                .elements
                .get(pos)
                .map_or_else(|| "end".to_string(), |e| e.to_string());
            for (s, v) in layer {
                out.insert(format!("{t},{s}"), *v);
            }
        }
        out
    }
}

/// Bellman recursion for one block with every value shifted down by `shift`; skipping is
/// always allowed. Ties go to acceptance.
pub fn solve_subproblem_dp(
    block: &Block,
    dists: &[DiscreteDistribution],
    shift: f64,
    cap: usize,
) -> Result<ValueTable> {
    let states = block.layers(cap)?;
    let m = block.len();
    let mut layers: Vec<BTreeMap<LocalState, f64>> = vec![BTreeMap::new(); m + 1];
    layers[m] = states[m].iter().map(|s| (s.clone(), 0.0)).collect();
    for pos in (0..m).rev() {
        let dist = &dists[block.elements()[pos]];
        let (done, todo) = layers.split_at_mut(pos + 1);
        let next = &todo[0];
        let cur = &mut done[pos];
        for s in &states[pos] {
            let skip = next[s];
            let tr = block.step(pos, s);
            let v = if tr.feasible {
                let take = next[&tr.next];
                dist.atoms()
                    .iter()
                    .map(|a| a.prob * (a.value - shift + take).max(skip))
                    .sum()
            } else {
                skip
            };
            cur.insert(s.clone(), v);
        }
    }
    Ok(ValueTable {
        scope: block.scope(),
        shift,
        elements: block.elements().to_vec(),
        layers,
    })
}

/// `τ = shift + V_{pos+1}(s) − V_{pos+1}(s after the pick)`, or +∞ if the pick is infeasible.
pub fn price(block: &Block, table: &ValueTable, pos: usize, state: &LocalState) -> f64 {
    let tr = block.step(pos, state);
    if !tr.feasible {
        return f64::INFINITY;
    }
    match (table.value(pos + 1, state), table.value(pos + 1, &tr.next)) {
        (Some(skip), Some(take)) => table.shift + skip - take,
        _ => f64::INFINITY,
    }
}

/// The threshold policy read off a value table, accepting at equality.
pub fn block_policy(block: &Block, table: &ValueTable) -> BlockPolicy {
    let rules = (0..block.len())
        .map(|pos| {
            table
                .layer(pos)
                .keys()
                .map(|s| {
                    let tau = price(block, table, pos, s);
                    let rule = if tau.is_finite() { Rule::at_least(tau) } else { Rule::REJECT };
                    (s.clone(), rule)
                })
                .collect()
        })
        .collect();
    BlockPolicy::new(block.clone(), rules)
}

/// Optimal online policy for the whole instance by exhaustive Bellman recursion.
pub fn solve_full_dp(inst: &LaminarInstance, cap: usize) -> Result<(ValueTable, PricingPolicy)> {
    let block = Block::whole(inst);
    let table = solve_subproblem_dp(&block, inst.elements(), 0.0, cap)?;
    let policy = PricingPolicy::new(inst.num_elements(), vec![block_policy(&block, &table)], Vec::new())?;
    Ok((table, policy))
}

/// Optimal online welfare computed directly on the production form: state = units sold per
/// type, a sale needs stock at the buyer's day and shipping room.
pub fn solve_production_dp(p: &ProductionInstance) -> f64 {
    fn go(
        p: &ProductionInstance,
        t: usize,
        sold: &mut Vec<u32>,
        total: u32,
        memo: &mut HashMap<(usize, Vec<u32>), f64>,
    ) -> f64 {
        if t == p.num_buyers() {
            return 0.0;
        }
        if let Some(&v) = memo.get(&(t, sold.clone())) {
            return v;
        }
        let j = p.types[t];
        let skip = go(p, t + 1, sold, total, memo);
        let can_sell = total < p.shipping && sold[j] < p.production[j][p.days[t]];
        let v = if can_sell {
            sold[j] += 1;
            let take = go(p, t + 1, sold, total + 1, memo);
            sold[j] -= 1;
            p.elements[t]
                .atoms()
                .iter()
                .map(|a| a.prob * (a.value + take).max(skip))
                .sum()
        } else {
            skip
        };
        memo.insert((t, sold.clone()), v);
        v
    }
    let mut sold = vec![0; p.num_types()];
    go(p, 0, &mut sold, 0, &mut HashMap::new())
}

/// Largest violation of `D(x) + D(x+2) ≤ 2·D(x+1)` in a one-dimensional table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    pub holds: bool,
    /// (position, middle-left state, violation amount) of the worst triple, if any triple exists.
    pub worst: Option<(usize, LocalState, f64)>,
}

pub const CONCAVITY_TOL: f64 = 1e-9;

pub fn concavity_check(table: &ValueTable) -> Result<ConcavityReport> {
    let mut worst: Option<(usize, LocalState, f64)> = None;
    for (pos, layer) in table.layers.iter().enumerate() {
        for (s, &d0) in layer {
            if s.0.len() != 1 {
                return Err(Error::Config(format!(
                    "concavity check needs a one-dimensional state, {} has {}",
                    table.scope,
                    s.0.len()
                )));
            }
            let x = s.0[0];
            let (Some(&d1), Some(&d2)) = (
                layer.get(&LocalState(vec![x + 1])),
                layer.get(&LocalState(vec![x + 2])),
            ) else {
                continue;
            };
            let gap = d0 + d2 - 2.0 * d1;
            if worst.as_ref().is_none_or(|w| gap > w.2) {
                worst = Some((pos, s.clone(), gap));
            }
        }
    }
    let holds = worst.as_ref().is_none_or(|w| w.2 <= CONCAVITY_TOL);
    Ok(ConcavityReport { holds, worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinSpec, DEFAULT_STATE_CAP};

    fn single_bin(dists: Vec<DiscreteDistribution>, cap: u32) -> LaminarInstance {
        let leaves = (0..dists.len()).map(BinSpec::leaf).collect();
        LaminarInstance::new(dists, &BinSpec::new(cap, leaves)).unwrap()
    }

    fn u(v: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::uniform(v).unwrap()
    }

    #[test]
    fn one_buyer() {
        let inst = single_bin(vec![DiscreteDistribution::deterministic(5.0)], 1);
        let (t, pol) = solve_full_dp(&inst, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(t.initial_value(), 5.0);
        assert_eq!(pol.blocks()[0].rule(0, &LocalState(vec![1])).unwrap().tau, 0.0);
    }

    #[test]
    fn skip_low_first_buyer() {
        let inst = single_bin(
            vec![DiscreteDistribution::deterministic(3.0), DiscreteDistribution::deterministic(5.0)],
            1,
        );
        let (t, pol) = solve_full_dp(&inst, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(t.initial_value(), 5.0);
        let r = pol.blocks()[0].rule(0, &LocalState(vec![1])).unwrap();
        assert_eq!(r.tau, 5.0);
        assert!(!r.accepts(3.0, 0.0));
    }

    #[test]
    fn uniform_then_deterministic() {
        let inst = single_bin(vec![u(&[0.0, 2.0]), DiscreteDistribution::deterministic(1.0)], 1);
        let (t, pol) = solve_full_dp(&inst, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(t.initial_value(), 1.5);
        assert_eq!(pol.blocks()[0].rule(0, &LocalState(vec![1])).unwrap().tau, 1.0);
    }

    #[test]
    fn shifted_values() {
        let inst = single_bin(vec![DiscreteDistribution::deterministic(5.0)], 1);
        let b = Block::whole(&inst);
        let t = solve_subproblem_dp(&b, inst.elements(), 6.0, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(t.initial_value(), 0.0);

        let inst = single_bin(vec![u(&[0.0, 2.0]), u(&[0.0, 2.0])], 1);
        let b = Block::whole(&inst);
        let t = solve_subproblem_dp(&b, inst.elements(), 0.5, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(t.value(1, &LocalState(vec![1])), Some(0.75));
        assert_eq!(t.initial_value(), 1.125);
    }

    #[test]
    fn corrupted_table_breaks_concavity() {
        let inst = single_bin(vec![u(&[0.0, 1.0, 3.0]); 4], 3);
        let b = Block::whole(&inst);
        let mut t = solve_subproblem_dp(&b, inst.elements(), 0.0, DEFAULT_STATE_CAP).unwrap();
        assert!(concavity_check(&t).unwrap().holds);
        t.set(2, LocalState(vec![2]), -100.0);
        let rep = concavity_check(&t).unwrap();
        assert!(!rep.holds);
        let (pos, s, _) = rep.worst.unwrap();
        assert_eq!(pos, 2);
        assert_eq!(s, LocalState(vec![1]));
    }

    #[test]
    fn debug_map_keys() {
        let inst = single_bin(vec![DiscreteDistribution::deterministic(5.0)], 1);
        let (t, _) = solve_full_dp(&inst, DEFAULT_STATE_CAP).unwrap();
        let m = t.to_debug_map();
        assert_eq!(m["0,(1)"], 5.0);
        assert_eq!(m["end,(0)"], 0.0);
    }
}
