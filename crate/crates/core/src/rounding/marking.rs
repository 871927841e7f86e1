use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BinId, LaminarInstance};

/// Split of the bins into large (constrained in expectation) and small (constrained
/// point-wise). Elements sitting directly in a large bin form singleton blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marking {
    large: BTreeSet<BinId>,
    small_all: BTreeSet<BinId>,
    small_maximal: Vec<BinId>,
    singletons: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkingSummary {
    pub large: Vec<BinId>,
    pub small_maximal: Vec<BinId>,
    pub num_small: usize,
    pub singletons: Vec<usize>,
}

/// Relative slack on the inclusive size threshold, so that `δ^{-k}` computed in floating
/// point does not flip a boundary bin.
const THRESHOLD_RTOL: f64 = 1e-9;

impl Marking {
    /// Builds the marking with the given large bins; every ancestor of a large bin must be large.
    pub fn from_large(inst: &LaminarInstance, large: impl IntoIterator<Item = BinId>) -> Result<Self> {
        let large: BTreeSet<BinId> = large.into_iter().collect();
        for &b in &large {
            if b.0 >= inst.bins().len() {
                return Err(Error::InvalidMarking(format!("bin {b} does not exist")));
            }
            if let Some(p) = inst.bin(b).parent {
                if !large.contains(&p) {
                    return Err(Error::InvalidMarking(format!(
                        "bin {b} is large but its parent {p} is small"
                    )));
                }
            }
        }
        let small_all: BTreeSet<BinId> = inst
            .bins()
            .iter()
            .map(|b| b.id)
            .filter(|b| !large.contains(b))
            .collect();
        let small_maximal = small_all
            .iter()
            .copied()
            .filter(|&b| inst.bin(b).parent.is_none_or(|p| large.contains(&p)))
            .collect();
        let mut singletons: Vec<usize> = large
            .iter()
            .flat_map(|&b| inst.bin(b).direct_elements.iter().copied())
            .collect();
        singletons.sort_unstable();
        Ok(Self {
            large,
            small_all,
            small_maximal,
            singletons,
        })
    }

    pub fn all_small(inst: &LaminarInstance) -> Self {
        Self::from_large(inst, []).expect("the empty large set is valid")
    }

    pub fn all_large(inst: &LaminarInstance) -> Self {
        Self::from_large(inst, inst.bins().iter().map(|b| b.id)).expect("the full large set is valid")
    }

    pub fn is_large(&self, b: BinId) -> bool {
        self.large.contains(&b)
    }

    pub fn large(&self) -> &BTreeSet<BinId> {
        &self.large
    }

    pub fn small_all(&self) -> &BTreeSet<BinId> {
        &self.small_all
    }

    pub fn small_maximal(&self) -> &[BinId] {
        &self.small_maximal
    }

    pub fn singletons(&self) -> &[usize] {
        &self.singletons
    }

    /// Type-invariant violations: maximal small bins and singletons partition the elements,
    /// and smallness is inherited downward.
    pub fn violations(&self, inst: &LaminarInstance) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = vec![0usize; inst.num_elements()];
        for &b in &self.small_maximal {
            for &e in &inst.bin(b).members {
                seen[e] += 1;
            }
        }
        for &e in &self.singletons {
            seen[e] += 1;
        }
        for (e, &c) in seen.iter().enumerate() {
            if c != 1 {
                out.push(format!("element {e} lies in {c} blocks"));
            }
        }
        for &b in &self.small_all {
            for &c in &inst.bin(b).child_bins {
                if self.large.contains(&c) {
                    out.push(format!("bin {c} is large below small bin {b}"));
                }
            }
        }
        out
    }

    pub fn summary(&self) -> MarkingSummary {
        MarkingSummary {
            large: self.large.iter().copied().collect(),
            small_maximal: self.small_maximal.clone(),
            num_small: self.small_all.len(),
            singletons: self.singletons.clone(),
        }
    }
}

/// A bin at depth `d` is small iff `k_B ≤ δ^{-(L-d)}` or its parent is small, with `L` the
/// number of bin levels.
pub fn mark_laminar(inst: &LaminarInstance, delta: f64) -> Result<Marking> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must lie in (0,1), got {delta}")));
    }
    let levels = inst.depth() as i32;
    let mut small = vec![false; inst.bins().len()];
    // Pre-order ids: parents come before children.
    for b in inst.bins() {
        let bound = delta.powi(-(levels - b.depth as i32));
        let by_rule = b.capacity as f64 <= bound * (1.0 + THRESHOLD_RTOL);
        let inherited = b.parent.is_some_and(|p| small[p.0]);
        small[b.id.0] = by_rule || inherited;
    }
    Marking::from_large(
        inst,
        inst.bins().iter().filter(|b| !small[b.id.0]).map(|b| b.id),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinSpec, DiscreteDistribution};

    fn inst(root_cap: u32, child_cap: u32, grandchild_cap: Option<u32>) -> LaminarInstance {
        let inner = match grandchild_cap {
            Some(g) => vec![
                BinSpec::leaf(1),
                BinSpec::new(g, vec![BinSpec::leaf(2), BinSpec::leaf(3)]).node(),
            ],
            None => vec![BinSpec::leaf(1), BinSpec::leaf(2), BinSpec::leaf(3)],
        };
        let root = BinSpec::new(root_cap, vec![BinSpec::leaf(0), BinSpec::new(child_cap, inner).node()]);
        LaminarInstance::new(vec![DiscreteDistribution::deterministic(1.0); 4], &root).unwrap()
    }

    #[test]
    fn threshold_rule() {
        let i = inst(101, 3, None);
        let mk = mark_laminar(&i, 0.1).unwrap();
        assert!(mk.is_large(BinId(0)));
        assert!(!mk.is_large(BinId(1)));
        assert_eq!(mk.small_maximal(), &[BinId(1)]);
        assert_eq!(mk.singletons(), &[0]);
        assert!(mk.violations(&i).is_empty());
    }

    #[test]
    fn inclusive_boundary_makes_everything_small() {
        let i = inst(100, 50, None);
        let mk = mark_laminar(&i, 0.1).unwrap();
        assert!(mk.large().is_empty());
        assert_eq!(mk.small_maximal(), &[BinId(0)]);
    }

    #[test]
    fn smallness_is_inherited() {
        // L = 3: root bound 8 makes it small; the grandchild alone (bound 2) would be large
        let i = inst(5, 5, Some(5));
        let mk = mark_laminar(&i, 0.5).unwrap();
        assert!(mk.large().is_empty());
        assert_eq!(mk.small_all().len(), 3);
    }

    #[test]
    fn invalid_large_sets_are_rejected() {
        let i = inst(101, 3, None);
        assert!(Marking::from_large(&i, [BinId(1)]).is_err());
        assert!(Marking::from_large(&i, [BinId(7)]).is_err());
    }
}
