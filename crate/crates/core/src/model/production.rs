use super::{BinSpec, DiscreteDistribution, LaminarInstance, NodeSpec};
use crate::error::{Error, Result};

/// Buyers of `num_types` product types arriving over `num_days` days, each type produced on a
/// cumulative schedule, and a shared shipping capacity.
///
/// Types and days are 0-based. `production[j][i]` is the number of type-`j` units available by
/// the start of day `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductionInstance {
    pub elements: Vec<DiscreteDistribution>,
    pub types: Vec<usize>,
    pub days: Vec<usize>,
    pub production: Vec<Vec<u32>>,
    pub shipping: u32,
}

impl ProductionInstance {
    pub fn new(
        elements: Vec<DiscreteDistribution>,
        types: Vec<usize>,
        days: Vec<usize>,
        production: Vec<Vec<u32>>,
        shipping: u32,
    ) -> Result<Self> {
        let inst = Self {
            elements,
            types,
            days,
            production,
            shipping,
        };
        let v = inst.violations();
        if v.is_empty() {
            Ok(inst)
        } else {
            Err(Error::InvalidInstance(v))
        }
    }

    pub fn num_buyers(&self) -> usize {
        self.elements.len()
    }

    pub fn num_types(&self) -> usize {
        self.production.len()
    }

    pub fn num_days(&self) -> usize {
        self.production.first().map_or(0, Vec::len)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.elements.len();
        let m = self.num_types();
        let t_days = self.num_days();
        for (i, d) in self.elements.iter().enumerate() {
            out.extend(d.violations().into_iter().map(|v| format!("elements[{i}].dist: {v}")));
        }
        if self.types.len() != n {
            out.push(format!("types has {} entries for {n} buyers", self.types.len()));
        }
        if self.days.len() != n {
            out.push(format!("days has {} entries for {n} buyers", self.days.len()));
        }
        for (t, &j) in self.types.iter().enumerate() {
            if j >= m {
                out.push(format!("types[{t}] = {j} is not a type (m = {m})"));
            }
        }
        for (t, &d) in self.days.iter().enumerate() {
            if d >= t_days {
                out.push(format!("days[{t}] = {d} is not a day (T = {t_days})"));
            }
        }
        for (t, w) in self.days.windows(2).enumerate() {
            if w[1] < w[0] {
                out.push(format!("days not non-decreasing at buyer {}", t + 1));
            }
        }
        for (j, row) in self.production.iter().enumerate() {
            if row.len() != t_days {
                out.push(format!(
                    "production.cumulative[{j}] has {} days, expected {t_days}",
                    row.len()
                ));
            }
            for (i, w) in row.windows(2).enumerate() {
                if w[1] < w[0] {
                    out.push(format!(
                        "production.cumulative[{j}] decreases at day {}",
                        i + 1
                    ));
                }
            }
        }
        out
    }

    /// Buyers of type `j`, in arrival order.
    pub fn buyers_of_type(&self, j: usize) -> Vec<usize> {
        (0..self.num_buyers()).filter(|&t| self.types[t] == j).collect()
    }

    /// Most type-`j_t` units that may have been sold once buyer `t` is served: the tightest
    /// production checkpoint at or after the buyer's day.
    pub fn sale_limit(&self, t: usize) -> u32 {
        let row = &self.production[self.types[t]];
        row[self.days[t]..].iter().copied().min().unwrap_or(0)
    }

    /// The nested-bin tree: a root of capacity `K` over one chain of bins per type, innermost
    /// bin = buyers of the earliest day. Chain bins with identical member sets are merged keeping
    /// the smaller capacity; the tree is otherwise left unnormalized.
    pub fn to_laminar_spec(&self) -> BinSpec {
        let mut root = BinSpec::new(self.shipping, Vec::new());
        for j in 0..self.num_types() {
            let buyers = self.buyers_of_type(j);
            let mut chain: Option<BinSpec> = None;
            let mut chain_members = 0usize;
            for day in 0..self.num_days() {
                let arrivals: Vec<usize> = buyers
                    .iter()
                    .copied()
                    .filter(|&t| self.days[t] == day)
                    .collect();
                let cap = self.production[j][day];
                if arrivals.is_empty() {
                    // Same members as the bin below: keep the smaller capacity.
                    if let Some(b) = chain.as_mut() {
                        b.cap = b.cap.min(cap);
                    }
                    continue;
                }
                let mut children: Vec<NodeSpec> = Vec::new();
                if let Some(inner) = chain.take() {
                    children.push(inner.node());
                }
                children.extend(arrivals.iter().map(|&t| BinSpec::leaf(t)));
                chain_members += arrivals.len();
                chain = Some(BinSpec::new(cap, children));
            }
            debug_assert_eq!(chain_members, buyers.len());
            if let Some(b) = chain {
                root.children.push(b.node());
            }
        }
        root
    }

    pub fn to_laminar(&self) -> Result<LaminarInstance> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(Error::InvalidInstance(v));
        }
        LaminarInstance::new(self.elements.clone(), &self.to_laminar_spec())
    }
}
