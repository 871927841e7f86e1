use serde::Serialize;

use crate::dp::{price, solve_subproblem_dp};
use crate::error::Result;
use crate::model::{BinSpec, Block, DiscreteDistribution, LaminarInstance, NodeSpec, DEFAULT_STATE_CAP};

/// Prices closer than this are treated as equal.
pub const PRICE_MARGIN: f64 = 1e-9;

/// Bounded family of laminar trees over fixed distributions. Element 0 arrives first and
/// element 1 second; the search compares the optimal price offered to element 1 after element 0
/// is picked against the price after it is skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub dists: Vec<DiscreteDistribution>,
    /// Most bins besides the root.
    pub max_bins: usize,
    pub max_cap: u32,
    /// Only nested prefix bins `{0..k}`, the shape of a single production chain.
    pub chains_only: bool,
}

impl SearchSpace {
    /// Two deterministic unit elements, then `U{0,1}`, then two `U{0,2}`.
    pub fn five_elements() -> Self {
        let det = DiscreteDistribution::deterministic(1.0);
        let u01 = DiscreteDistribution::uniform(&[0.0, 1.0]).expect("valid");
        let u02 = DiscreteDistribution::uniform(&[0.0, 2.0]).expect("valid");
        Self {
            dists: vec![det.clone(), det, u01, u02.clone(), u02],
            max_bins: 3,
            max_cap: 3,
            chains_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub tree: BinSpec,
    pub price_after_pick: f64,
    pub price_after_skip: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub examined: usize,
    pub hits: Vec<Hit>,
    /// First hit whose prices are exactly 1 after a pick and 1.25 after a skip.
    pub canonical: Option<Hit>,
}

fn is_laminar(a: u32, b: u32) -> bool {
    a & b == 0 || a & b == a || a & b == b
}

fn subset_families(n: usize, max_bins: usize, chains_only: bool) -> Vec<Vec<u32>> {
    let full = (1u32 << n) - 1;
    let candidates: Vec<u32> = if chains_only {
        (2..=n).map(|k| (1u32 << k) - 1).collect()
    } else {
        (1..=full).filter(|m| m.count_ones() >= 2).collect()
    };
    let mut out = vec![Vec::new()];
    fn grow(cands: &[u32], start: usize, cur: &mut Vec<u32>, left: usize, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            return;
        }
        for i in start..cands.len() {
            if cur.iter().all(|&c| is_laminar(c, cands[i])) {
                cur.push(cands[i]);
                out.push(cur.clone());
                grow(cands, i + 1, cur, left - 1, out);
                cur.pop();
            }
        }
    }
    grow(&candidates, 0, &mut Vec::new(), max_bins, &mut out);
    out
}

/// Tree over element set `mask`, with the given bins strictly inside it.
fn build(mask: u32, cap: u32, bins: &[(u32, u32)], n: usize) -> BinSpec {
    let inner: Vec<(u32, u32)> = bins.iter().copied().filter(|&(b, _)| b != mask && b & mask == b).collect();
    let maximal: Vec<(u32, u32)> = inner
        .iter()
        .copied()
        .filter(|&(b, _)| !inner.iter().any(|&(o, _)| o != b && o & b == b))
        .collect();
    let covered = maximal.iter().fold(0, |acc, &(b, _)| acc | b);
    let mut children: Vec<NodeSpec> = (0..n)
        .filter(|&e| mask & (1 << e) != 0 && covered & (1 << e) == 0)
        .map(BinSpec::leaf)
        .collect();
    children.extend(maximal.iter().map(|&(b, c)| build(b, c, &inner, n).node()));
    BinSpec::new(cap, children)
}

fn cap_choices(family: &[u32], max_cap: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &b in family {
        let hi = max_cap.min(b.count_ones() - 1);
        out = out
            .into_iter()
            .flat_map(|pre| {
                (1..=hi).map(move |c| {
                    let mut v = pre.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

/// Conditional optimal prices to element 1 after element 0 is picked and after it is skipped.
pub fn conditional_prices(inst: &LaminarInstance) -> Result<Option<(f64, f64)>> {
    let block = Block::whole(inst);
    let table = solve_subproblem_dp(&block, inst.elements(), 0.0, DEFAULT_STATE_CAP)?;
    let s0 = block.initial();
    let tr = block.step(0, &s0);
    if !tr.feasible {
        return Ok(None);
    }
    Ok(Some((price(&block, &table, 1, &tr.next), price(&block, &table, 1, &s0))))
}

/// Exhaustive search for a tree where an earlier pick lowers the optimal price of a later
/// element, which cannot happen on a single chain.
pub fn search_dependency_counterexample(space: &SearchSpace) -> Result<SearchOutcome> {
    let n = space.dists.len();
    let full = (1u32 << n) - 1;
    let mut examined = 0;
    let mut hits = Vec::new();
    for family in subset_families(n, space.max_bins, space.chains_only) {
        for caps in cap_choices(&family, space.max_cap) {
            let bins: Vec<(u32, u32)> = family.iter().copied().zip(caps).collect();
            let root_cap = bins.iter().find(|&&(b, _)| b == full).map_or(n as u32, |&(_, c)| c);
            let tree = build(full, root_cap, &bins, n);
            let inst = LaminarInstance::new(space.dists.clone(), &tree)?;
            examined += 1;
            if let Some((pick, skip)) = conditional_prices(&inst)? {
                if pick < skip - PRICE_MARGIN {
                    hits.push(Hit {
                        tree,
                        price_after_pick: pick,
                        price_after_skip: skip,
                    });
                }
            }
        }
    }
    let canonical = hits
        .iter()
        .find(|h| (h.price_after_pick - 1.0).abs() <= PRICE_MARGIN && (h.price_after_skip - 1.25).abs() <= PRICE_MARGIN)
        .cloned();
    Ok(SearchOutcome {
        examined,
        hits,
        canonical,
    })
}
