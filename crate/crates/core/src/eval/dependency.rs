use std::collections::BTreeMap;

use serde::Serialize;

use crate::dp::{block_policy, solve_subproblem_dp};
use crate::error::{Error, Result};
use crate::model::{Block, DiscreteDistribution, LocalState, DEFAULT_STATE_CAP};

/// Most arrivals the exhaustive subset check accepts.
pub const MAX_CYLINDER_ELEMENTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderReport {
    pub holds: bool,
    /// Elements of the subset with the largest `E[∏X] − ∏E[X]`.
    pub worst_subset: Vec<usize>,
    pub gap: f64,
    /// `E[X_t]` per arrival of the block.
    pub marginals: Vec<f64>,
    pub subsets_checked: usize,
}

/// Exact joint law of the acceptance indicators of a block under its optimal policy for values
/// shifted down by `shift`, as probabilities indexed by acceptance bitmask.
pub fn acceptance_law(block: &Block, dists: &[DiscreteDistribution], shift: f64) -> Result<Vec<f64>> {
    let m = block.len();
    if m > MAX_CYLINDER_ELEMENTS {
        return Err(Error::Sizing {
            scope: format!("acceptance patterns of {}", block.scope()),
            limit: 1 << MAX_CYLINDER_ELEMENTS,
        });
    }
    let table = solve_subproblem_dp(block, dists, shift, DEFAULT_STATE_CAP)?;
    let policy = block_policy(block, &table);
    let mut cur: BTreeMap<(LocalState, u32), f64> = BTreeMap::from([((block.initial(), 0), 1.0)]);
    for pos in 0..m {
        let dist = &dists[block.elements()[pos]];
        let mut next = BTreeMap::new();
        for ((s, mask), pr) in cur {
            let rule = if block.can_accept(pos, &s) {
                policy.rule(pos, &s).expect("dp covers every feasible state")
            } else {
                crate::rounding::Rule::REJECT
            };
            let a = rule.accept_prob(dist);
            if a < 1.0 {
                *next.entry((s.clone(), mask)).or_insert(0.0) += pr * (1.0 - a);
            }
            if a > 0.0 {
                *next.entry((block.step(pos, &s).next, mask | 1 << pos)).or_insert(0.0) += pr * a;
            }
        }
        cur = next;
    }
    let mut law = vec![0.0; 1 << m];
    for ((_, mask), pr) in cur {
        law[mask as usize] += pr;
    }
    Ok(law)
}

/// Checks `E[∏_{t∈S} X_t] ≤ ∏_{t∈S} E[X_t] + tol` for every subset `S` of the block's arrivals.
pub fn check_negative_cylinder(
    block: &Block,
    dists: &[DiscreteDistribution],
    shift: f64,
    tol: f64,
) -> Result<CylinderReport> {
    let m = block.len();
    let mut up = acceptance_law(block, dists, shift)?;
    // superset sums: up[S] = Pr[all of S accepted]
    for i in 0..m {
        for mask in 0..up.len() {
            if mask & (1 << i) == 0 {
                up[mask] += up[mask | 1 << i];
            }
        }
    }
    let marginals: Vec<f64> = (0..m).map(|i| up[1 << i]).collect();
    let mut worst = (0usize, f64::NEG_INFINITY);
    let mut checked = 0;
    for (mask, &joint) in up.iter().enumerate() {
        if mask.count_ones() < 2 {
            continue;
        }
        checked += 1;
        let prod: f64 = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| marginals[i]).product();
        let gap = joint - prod;
        if gap > worst.1 {
            worst = (mask, gap);
        }
    }
    let gap = if checked == 0 { 0.0 } else { worst.1 };
    Ok(CylinderReport {
        holds: gap <= tol,
        worst_subset: (0..m)
            .filter(|i| checked > 0 && worst.0 & (1 << i) != 0)
            .map(|i| block.elements()[i])
            .collect(),
        gap,
        marginals,
        subsets_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinSpec, LaminarInstance};

    #[test]
    fn cap_one_is_mutually_exclusive() {
        let d = vec![DiscreteDistribution::uniform(&[0.0, 2.0]).unwrap(); 2];
        let inst = LaminarInstance::new(d.clone(), &BinSpec::new(1, vec![BinSpec::leaf(0), BinSpec::leaf(1)])).unwrap();
        let law = acceptance_law(&Block::whole(&inst), &d, 0.0).unwrap();
        assert_eq!(law[0b11], 0.0);
        let r = check_negative_cylinder(&Block::whole(&inst), &d, 0.0, 1e-9).unwrap();
        assert!(r.holds);
        assert!(r.gap < 0.0);
    }

    #[test]
    fn loose_capacity_gives_independence() {
        let d = vec![DiscreteDistribution::uniform(&[0.0, 1.0, 3.0]).unwrap(); 4];
        let inst = LaminarInstance::new(d.clone(), &BinSpec::new(4, (0..4).map(BinSpec::leaf).collect())).unwrap();
        let r = check_negative_cylinder(&Block::whole(&inst), &d, 0.0, 1e-9).unwrap();
        assert!(r.holds);
        assert!(r.gap.abs() < 1e-12, "{}", r.gap);
        assert_eq!(r.subsets_checked, 11);
    }
}
