use std::fmt;

use serde::{Deserialize, Serialize};

use super::DiscreteDistribution;
use crate::error::{Error, Result};

/// Index of a bin in pre-order over the normalized tree; the root is `BinId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinId(pub usize);

impl fmt::Display for BinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Leaf of the instance JSON tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRef {
    pub element: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeSpec {
    Element(ElementRef),
    Bin(BinSpec),
}

/// A bin as written in instance JSON: `{"cap": k, "children": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub cap: u32,
    pub children: Vec<NodeSpec>,
}

impl BinSpec {
    pub fn new(cap: u32, children: Vec<NodeSpec>) -> Self {
        Self { cap, children }
    }

    pub fn leaf(element: usize) -> NodeSpec {
        NodeSpec::Element(ElementRef { element })
    }

    pub fn node(self) -> NodeSpec {
        NodeSpec::Bin(self)
    }

    /// Elements listed anywhere below this bin, in tree order (duplicates kept).
    pub fn listed_elements(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk(&mut |_, _, node| {
            if let NodeSpec::Element(e) = node {
                out.push(e.element);
            }
        });
        out
    }

    /// Pre-order walk over child nodes, reporting the pre-order id of the enclosing bin and
    /// its ancestor chain (root first).
    fn walk(&self, visit: &mut impl FnMut(usize, &[usize], &NodeSpec)) {
        fn go(
            bin: &BinSpec,
            id: usize,
            next: &mut usize,
            chain: &mut Vec<usize>,
            visit: &mut impl FnMut(usize, &[usize], &NodeSpec),
        ) {
            chain.push(id);
            for child in &bin.children {
                visit(id, chain, child);
                if let NodeSpec::Bin(b) = child {
                    *next += 1;
                    let cid = *next;
                    go(b, cid, next, chain, visit);
                }
            }
            chain.pop();
        }
        let mut next = 0;
        let mut chain = Vec::new();
        go(self, 0, &mut next, &mut chain, visit);
    }

    /// Structural violations of the tree against `num_elements` elements.
    pub fn violations(&self, num_elements: usize) -> Vec<String> {
        let mut out = Vec::new();
        // (bin id, ancestor chain) of every leaf for each element
        let mut seen: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); num_elements];
        self.walk(&mut |bin, chain, node| {
            if let NodeSpec::Element(e) = node {
                if e.element >= num_elements {
                    out.push(format!(
                        "bins.{bin}: element {} out of range (n = {num_elements})",
                        e.element
                    ));
                } else {
                    seen[e.element].push((bin, chain.to_vec()));
                }
            }
        });
        for (e, places) in seen.iter().enumerate() {
            if places.is_empty() {
                out.push(format!("element {e} does not appear in any leaf"));
                continue;
            }
            for (i, (a, chain_a)) in places.iter().enumerate() {
                for (b, chain_b) in &places[i + 1..] {
                    let nested = chain_a.contains(b) || chain_b.contains(a);
                    if nested {
                        out.push(format!("element {e} appears in more than one leaf"));
                    } else {
                        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                        out.push(format!(
                            "bins {lo},{hi} violate laminarity (both contain element {e})"
                        ));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub id: BinId,
    pub capacity: u32,
    pub parent: Option<BinId>,
    /// Distance from the root.
    pub depth: usize,
    pub child_bins: Vec<BinId>,
    pub direct_elements: Vec<usize>,
    /// All elements below this bin, ascending.
    pub members: Vec<usize>,
    /// This bin followed by all its descendant bins, in pre-order.
    pub subtree: Vec<BinId>,
}

/// A normalized laminar instance. Elements arrive in index order.
///
/// Normalization happens at construction: empty bins are dropped, child capacities are clamped
/// to their parent's, and bins with identical member sets are collapsed into one bin keeping the
/// smaller capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct LaminarInstance {
    elements: Vec<DiscreteDistribution>,
    bins: Vec<Bin>,
    element_bin: Vec<BinId>,
    depth: usize,
}

struct NormBin {
    cap: u32,
    elements: Vec<usize>,
    bins: Vec<NormBin>,
}

impl NormBin {
    fn is_empty(&self) -> bool {
        self.elements.is_empty() && self.bins.is_empty()
    }
}

fn normalize(spec: &BinSpec, parent_cap: u32) -> NormBin {
    let mut node = NormBin {
        cap: spec.cap.min(parent_cap),
        elements: Vec::new(),
        bins: Vec::new(),
    };
    for child in &spec.children {
        match child {
            NodeSpec::Element(e) => node.elements.push(e.element),
            NodeSpec::Bin(b) => {
                let sub = normalize(b, node.cap);
                if !sub.is_empty() {
                    node.bins.push(sub);
                }
            }
        }
    }
    while node.elements.is_empty() && node.bins.len() == 1 {
        let only = node.bins.pop().expect("one child");
        node.cap = node.cap.min(only.cap);
        node.elements = only.elements;
        node.bins = only.bins;
    }
    node
}

impl LaminarInstance {
    pub fn new(elements: Vec<DiscreteDistribution>, root: &BinSpec) -> Result<Self> {
        let violations = Self::violations(&elements, root);
        if !violations.is_empty() {
            return Err(Error::InvalidInstance(violations));
        }
        let norm = normalize(root, root.cap);
        let n = elements.len();
        let mut inst = Self {
            elements,
            bins: Vec::new(),
            element_bin: vec![BinId(0); n],
            depth: 0,
        };
        inst.flatten(&norm, None, 0);
        inst.depth = inst.bins.iter().map(|b| b.depth + 1).max().unwrap_or(0);
        Ok(inst)
    }

    /// All violations of the raw instance data, each naming the offending field.
    pub fn violations(elements: &[DiscreteDistribution], root: &BinSpec) -> Vec<String> {
        let mut out = Vec::new();
        for (i, d) in elements.iter().enumerate() {
            out.extend(d.violations().into_iter().map(|v| format!("elements[{i}].dist: {v}")));
        }
        out.extend(root.violations(elements.len()));
        out
    }

    fn flatten(&mut self, node: &NormBin, parent: Option<BinId>, depth: usize) -> BinId {
        let id = BinId(self.bins.len());
        self.bins.push(Bin {
            id,
            capacity: node.cap,
            parent,
            depth,
            child_bins: Vec::new(),
            direct_elements: node.elements.clone(),
            members: Vec::new(),
            subtree: vec![id],
        });
        for &e in &node.elements {
            self.element_bin[e] = id;
        }
        let mut members = node.elements.clone();
        let mut subtree = vec![id];
        let mut children = Vec::new();
        for child in &node.bins {
            let cid = self.flatten(child, Some(id), depth + 1);
            children.push(cid);
            members.extend_from_slice(&self.bins[cid.0].members);
            subtree.extend_from_slice(&self.bins[cid.0].subtree);
        }
        members.sort_unstable();
        let bin = &mut self.bins[id.0];
        bin.child_bins = children;
        bin.members = members;
        bin.subtree = subtree;
        id
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DiscreteDistribution] {
        &self.elements
    }

    pub fn distribution(&self, element: usize) -> &DiscreteDistribution {
        &self.elements[element]
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn bin(&self, id: BinId) -> &Bin {
        &self.bins[id.0]
    }

    pub fn root(&self) -> BinId {
        BinId(0)
    }

    /// Number of bin levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Innermost bin containing `element`.
    pub fn element_bin(&self, element: usize) -> BinId {
        self.element_bin[element]
    }

    /// Bins containing `element`, innermost first.
    pub fn element_path(&self, element: usize) -> Vec<BinId> {
        let mut out = Vec::new();
        let mut cur = Some(self.element_bin[element]);
        while let Some(b) = cur {
            out.push(b);
            cur = self.bins[b.0].parent;
        }
        out
    }

    pub fn contains(&self, bin: BinId, element: usize) -> bool {
        self.bins[bin.0].members.binary_search(&element).is_ok()
    }

    /// Whether `inner` equals `outer` or lies below it.
    pub fn is_within(&self, inner: BinId, outer: BinId) -> bool {
        let mut cur = Some(inner);
        while let Some(b) = cur {
            if b == outer {
                return true;
            }
            cur = self.bins[b.0].parent;
        }
        false
    }

    /// The normalized tree in instance-JSON form.
    pub fn to_spec(&self) -> BinSpec {
        self.spec_of(self.root())
    }

    fn spec_of(&self, id: BinId) -> BinSpec {
        let bin = &self.bins[id.0];
        let mut children: Vec<NodeSpec> = bin.direct_elements.iter().map(|&e| BinSpec::leaf(e)).collect();
        children.extend(bin.child_bins.iter().map(|&c| self.spec_of(c).node()));
        BinSpec::new(bin.capacity, children)
    }

    /// Same structure with every distribution replaced.
    pub fn with_distributions(&self, elements: Vec<DiscreteDistribution>) -> Result<Self> {
        Self::new(elements, &self.to_spec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(n: usize) -> Vec<DiscreteDistribution> {
        (0..n).map(|i| DiscreteDistribution::deterministic(i as f64 + 1.0)).collect()
    }

    #[test]
    fn partial_overlap_is_reported_by_bin_ids() {
        // root(0) -> bin 1 {e0}, bin 2 {e1, e2}, bin 3 {e2, e3}
        let root = BinSpec::new(
            4,
            vec![
                BinSpec::new(1, vec![BinSpec::leaf(0)]).node(),
                BinSpec::new(2, vec![BinSpec::leaf(1), BinSpec::leaf(2)]).node(),
                BinSpec::new(2, vec![BinSpec::leaf(2), BinSpec::leaf(3)]).node(),
            ],
        );
        let v = LaminarInstance::violations(&det(4), &root);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].starts_with("bins 2,3 violate laminarity"), "{v:?}");
    }

    #[test]
    fn missing_and_out_of_range_elements() {
        let root = BinSpec::new(1, vec![BinSpec::leaf(0), BinSpec::leaf(7)]);
        let v = LaminarInstance::violations(&det(2), &root);
        assert!(v.iter().any(|s| s.contains("out of range")));
        assert!(v.iter().any(|s| s.contains("element 1 does not appear")));
    }

    #[test]
    fn normalization_clamps_and_collapses() {
        // root cap 1 -> bin cap 2 -> 3 leaves: identical members collapse, keep min cap
        let root = BinSpec::new(
            1,
            vec![BinSpec::new(2, vec![BinSpec::leaf(0), BinSpec::leaf(1), BinSpec::leaf(2)]).node()],
        );
        let inst = LaminarInstance::new(det(3), &root).unwrap();
        assert_eq!(inst.bins().len(), 1);
        assert_eq!(inst.bin(inst.root()).capacity, 1);
        assert_eq!(inst.depth(), 1);

        // child capacity clamped to parent's
        let root = BinSpec::new(
            2,
            vec![
                BinSpec::leaf(0),
                BinSpec::new(5, vec![BinSpec::leaf(1), BinSpec::leaf(2)]).node(),
            ],
        );
        let inst = LaminarInstance::new(det(3), &root).unwrap();
        assert_eq!(inst.bins().len(), 2);
        assert_eq!(inst.bin(BinId(1)).capacity, 2);
        assert_eq!(inst.bin(BinId(1)).members, vec![1, 2]);
        assert_eq!(inst.element_path(2), vec![BinId(1), BinId(0)]);
        assert_eq!(inst.depth(), 2);
    }

    #[test]
    fn empty_bins_are_dropped() {
        let root = BinSpec::new(
            3,
            vec![BinSpec::leaf(0), BinSpec::leaf(1), BinSpec::new(1, vec![]).node()],
        );
        let inst = LaminarInstance::new(det(2), &root).unwrap();
        assert_eq!(inst.bins().len(), 1);
    }
}
