use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::{DiscreteDistribution, LocalState, DEFAULT_STATE_CAP};
use crate::rounding::{BlockPolicy, ExecState, PricingPolicy, Quote};

/// Exact expected welfare and, per block, the probability of each local state before each of
/// its arrivals (plus the terminal layer).
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEvaluation {
    pub welfare: f64,
    /// `trace[block][pos][state]`; only reached states appear.
    pub trace: Vec<Vec<BTreeMap<LocalState, f64>>>,
    /// Expected welfare collected inside each block.
    pub block_welfare: Vec<f64>,
    /// Probability that each element is quoted +∞ by a full guard.
    pub ignored: Vec<f64>,
    /// Probability that each element is accepted.
    pub accepted: Vec<f64>,
}

/// Forward pass over the joint policy state. `cap` bounds the number of joint states alive at
/// once.
pub fn evaluate_exact(policy: &PricingPolicy, dists: &[DiscreteDistribution], cap: usize) -> Result<ExactEvaluation> {
    if dists.len() != policy.num_elements() {
        return Err(Error::PolicyMismatch(format!(
            "policy covers {} elements, instance has {}",
            policy.num_elements(),
            dists.len()
        )));
    }
    let blocks = policy.blocks();
    let mut trace: Vec<Vec<BTreeMap<LocalState, f64>>> = blocks
        .iter()
        .map(|b| vec![BTreeMap::new(); b.block().len() + 1])
        .collect();
    let mut block_welfare = vec![0.0; blocks.len()];
    let mut ignored = vec![0.0; dists.len()];
    let mut accepted = vec![0.0; dists.len()];
    let mut cur: HashMap<ExecState, f64> = HashMap::from([(policy.start(), 1.0)]);
    for (e, dist) in dists.iter().enumerate() {
        let (bi, pos) = policy.locate(e);
        let mut next: HashMap<ExecState, f64> = HashMap::with_capacity(cur.len() * 2);
        for (st, &pr) in &cur {
            *trace[bi][pos].entry(st.block_states[bi].clone()).or_default() += pr;
            let quote = policy.quote(st, e)?;
            if quote == Quote::Ignored {
                ignored[e] += pr;
            }
            let rule = quote.rule();
            let a = rule.accept_prob(dist);
            block_welfare[bi] += pr * rule.expected_value(dist);
            accepted[e] += pr * a;
            if a < 1.0 {
                *next.entry(st.clone()).or_default() += pr * (1.0 - a);
            }
            if a > 0.0 {
                let mut s2 = st.clone();
                policy.commit(&mut s2, e, true);
                *next.entry(s2).or_default() += pr * a;
            }
        }
        if next.len() > cap {
            return Err(Error::Sizing {
                scope: "joint policy state".into(),
                limit: cap,
            });
        }
        cur = next;
    }
    for (st, &pr) in &cur {
        for (bi, s) in st.block_states.iter().enumerate() {
            let m = blocks[bi].block().len();
            *trace[bi][m].entry(s.clone()).or_default() += pr;
        }
    }
    Ok(ExactEvaluation {
        welfare: block_welfare.iter().sum(),
        trace,
        block_welfare,
        ignored,
        accepted,
    })
}

/// Exact evaluation of one block on its own, ignoring any guards.
pub fn evaluate_block(bp: &BlockPolicy, dists: &[DiscreteDistribution]) -> Result<(f64, Vec<BTreeMap<LocalState, f64>>)> {
    let block = bp.block();
    let mut trace = vec![BTreeMap::new(); block.len() + 1];
    trace[0].insert(block.initial(), 1.0);
    let mut welfare = 0.0;
    for pos in 0..block.len() {
        let dist = &dists[block.elements()[pos]];
        let (done, todo) = trace.split_at_mut(pos + 1);
        for (s, &pr) in &done[pos] {
            let rule = if block.can_accept(pos, s) {
                bp.rule(pos, s).ok_or_else(|| {
                    Error::PolicyMismatch(format!("no rule for position {pos} in state {s} of {}", block.scope()))
                })?
            } else {
                crate::rounding::Rule::REJECT
            };
            let a = rule.accept_prob(dist);
            welfare += pr * rule.expected_value(dist);
            if a < 1.0 {
                *todo[0].entry(s.clone()).or_default() += pr * (1.0 - a);
            }
            if a > 0.0 {
                *todo[0].entry(block.step(pos, s).next).or_default() += pr * a;
            }
        }
        if todo[0].len() > DEFAULT_STATE_CAP {
            return Err(Error::Sizing {
                scope: block.scope().to_string(),
                limit: DEFAULT_STATE_CAP,
            });
        }
    }
    Ok((welfare, trace))
}
