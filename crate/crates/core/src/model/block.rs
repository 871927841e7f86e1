use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BinId, LaminarInstance, ProductionInstance};
use crate::error::{Error, Result};

/// Default cap on the (layer, state) pairs enumerated for one sub-problem.
pub const DEFAULT_STATE_CAP: usize = 200_000;

/// Which sub-problem a [`Block`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockScope {
    /// A bin and everything below it. `Bin(root)` is the whole instance.
    Bin(BinId),
    /// The chain of production bins of one product type, tracked by units sold.
    Type(usize),
    /// A lone element whose innermost bin is not tracked point-wise.
    Element(usize),
}

impl fmt::Display for BlockScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockScope::Bin(b) => write!(f, "bin {b}"),
            BlockScope::Type(j) => write!(f, "type {j}"),
            BlockScope::Element(e) => write!(f, "element {e}"),
        }
    }
}

/// Local state of a sub-problem. For bin blocks: remaining capacities of the bins of the
/// sub-tree in pre-order. For type blocks: a single entry, the number of units sold so far.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocalState(pub Vec<i32>);

impl LocalState {
    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }
}

impl fmt::Display for LocalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum BlockKind {
    Remaining {
        bins: Vec<BinId>,
        capacities: Vec<i32>,
        /// Per position: indices into `bins` that an acceptance consumes.
        picks: Vec<Vec<usize>>,
    },
    Sold {
        /// Per position: units that may have been sold once this buyer is served.
        limits: Vec<u32>,
    },
}

/// One sub-problem: an ordered set of elements and the point-wise capacity rules among them.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    scope: BlockScope,
    elements: Vec<usize>,
    kind: BlockKind,
}

/// Result of accepting the element at some position from some state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub next: LocalState,
    pub feasible: bool,
}

impl Block {
    pub fn for_bin(inst: &LaminarInstance, bin: BinId) -> Self {
        let b = inst.bin(bin);
        let bins = b.subtree.clone();
        let capacities = bins
            .iter()
            .map(|&id| inst.bin(id).capacity as i32)
            .collect();
        let picks = b
            .members
            .iter()
            .map(|&e| {
                bins.iter()
                    .enumerate()
                    .filter(|(_, &id)| inst.contains(id, e))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Self {
            scope: BlockScope::Bin(bin),
            elements: b.members.clone(),
            kind: BlockKind::Remaining {
                bins,
                capacities,
                picks,
            },
        }
    }

    pub fn whole(inst: &LaminarInstance) -> Self {
        Self::for_bin(inst, inst.root())
    }

    pub fn singleton(element: usize) -> Self {
        Self {
            scope: BlockScope::Element(element),
            elements: vec![element],
            kind: BlockKind::Remaining {
                bins: Vec::new(),
                capacities: Vec::new(),
                picks: vec![Vec::new()],
            },
        }
    }

    /// The production sub-problem of type `j`, with the sold count as state.
    pub fn for_type(p: &ProductionInstance, j: usize) -> Self {
        let elements = p.buyers_of_type(j);
        let limits = elements.iter().map(|&t| p.sale_limit(t)).collect();
        Self {
            scope: BlockScope::Type(j),
            elements,
            kind: BlockKind::Sold { limits },
        }
    }

    pub fn scope(&self) -> BlockScope {
        self.scope
    }

    /// Elements in arrival order.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn position_of(&self, element: usize) -> Option<usize> {
        self.elements.binary_search(&element).ok()
    }

    /// Whether the state is a sold count (true) or a remaining-capacity vector.
    pub fn is_count_state(&self) -> bool {
        matches!(self.kind, BlockKind::Sold { .. })
    }

    /// Bins tracked by the state vector (empty for type and singleton blocks).
    pub fn tracked_bins(&self) -> &[BinId] {
        match &self.kind {
            BlockKind::Remaining { bins, .. } => bins,
            BlockKind::Sold { .. } => &[],
        }
    }

    pub fn initial(&self) -> LocalState {
        match &self.kind {
            BlockKind::Remaining { capacities, .. } => LocalState(capacities.clone()),
            BlockKind::Sold { .. } => LocalState(vec![0]),
        }
    }

    /// Accepting the element at `pos` from `state`.
    pub fn step(&self, pos: usize, state: &LocalState) -> Transition {
        match &self.kind {
            BlockKind::Remaining { picks, .. } => {
                let mut next = state.clone();
                for &i in &picks[pos] {
                    next.0[i] -= 1;
                }
                let feasible = next.is_nonnegative();
                Transition { next, feasible }
            }
            BlockKind::Sold { limits } => {
                let sold = state.0[0] + 1;
                Transition {
                    next: LocalState(vec![sold]),
                    feasible: sold <= limits[pos] as i32,
                }
            }
        }
    }

    /// Whether accepting the element at `pos` from `state` keeps every capacity intact.
    pub fn can_accept(&self, pos: usize, state: &LocalState) -> bool {
        self.step(pos, state).feasible
    }

    /// Reachable states before each arrival, plus the terminal layer; each layer sorted.
    /// `cap` bounds the total number of (layer, state) pairs, which is what the DP tables and
    /// the LPs are sized by.
    pub fn layers(&self, cap: usize) -> Result<Vec<Vec<LocalState>>> {
        let mut layers = Vec::with_capacity(self.len() + 1);
        let mut current: BTreeSet<LocalState> = BTreeSet::new();
        current.insert(self.initial());
        let mut total = 1usize;
        for pos in 0..self.len() {
            let mut next = current.clone();
            for s in &current {
                let tr = self.step(pos, s);
                if tr.feasible {
                    next.insert(tr.next);
                }
            }
            total += next.len();
            if total > cap {
                return Err(self.sizing_error(cap));
            }
            layers.push(current.into_iter().collect());
            current = next;
        }
        layers.push(current.into_iter().collect());
        Ok(layers)
    }

    fn sizing_error(&self, cap: usize) -> Error {
        Error::Sizing {
            scope: self.scope.to_string(),
            limit: cap,
        }
    }

    /// Every local state reachable by some feasible policy.
    pub fn state_space(&self, cap: usize) -> Result<BTreeSet<LocalState>> {
        Ok(self.layers(cap)?.into_iter().flatten().collect())
    }

    /// Infeasible states one acceptance away from a feasible one.
    pub fn forbidden_neighbors(&self, cap: usize) -> Result<BTreeSet<LocalState>> {
        let states = self.state_space(cap)?;
        let mut out = BTreeSet::new();
        for s in &states {
            for pos in 0..self.len() {
                let tr = self.step(pos, s);
                if !tr.feasible {
                    out.insert(tr.next);
                }
            }
        }
        Ok(out)
    }

    /// For each position, infeasible states reached from that layer by one acceptance.
    pub fn layer_forbidden(&self, layers: &[Vec<LocalState>]) -> Vec<BTreeSet<LocalState>> {
        (0..self.len())
            .map(|pos| {
                layers[pos]
                    .iter()
                    .map(|s| self.step(pos, s))
                    .filter(|tr| !tr.feasible)
                    .map(|tr| tr.next)
                    .collect()
            })
            .collect()
    }
}
