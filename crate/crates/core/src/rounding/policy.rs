use std::collections::BTreeMap;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BinId, Block, BlockScope, DiscreteDistribution, Instance, LaminarInstance, LocalState};

/// Posted price `tau` with tie-break acceptance probability `p` at `v == tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rule {
    pub tau: f64,
    pub p: f64,
}

impl Rule {
    pub const REJECT: Rule = Rule {
        tau: f64::INFINITY,
        p: 0.0,
    };

    /// Accept every value at or above `tau`.
    pub fn at_least(tau: f64) -> Self {
        Self { tau, p: 1.0 }
    }

    pub fn is_reject(&self) -> bool {
        self.tau == f64::INFINITY
    }

    pub fn accepts(&self, value: f64, coin: f64) -> bool {
        value > self.tau || (value == self.tau && coin < self.p)
    }

    pub fn accept_prob(&self, d: &DiscreteDistribution) -> f64 {
        if self.is_reject() {
            return 0.0;
        }
        d.tail_above(self.tau) + self.p * d.mass_at(self.tau)
    }

    /// `E[v · 1{accept}]`.
    pub fn expected_value(&self, d: &DiscreteDistribution) -> f64 {
        if self.is_reject() {
            return 0.0;
        }
        d.atoms()
            .iter()
            .map(|a| {
                if a.value > self.tau {
                    a.prob * a.value
                } else if a.value == self.tau {
                    self.p * a.prob * a.value
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Rules for one block, indexed by position within the block and local state.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPolicy {
    block: Block,
    rules: Vec<BTreeMap<LocalState, Rule>>,
}

impl BlockPolicy {
    pub fn new(block: Block, rules: Vec<BTreeMap<LocalState, Rule>>) -> Self {
        assert_eq!(block.len(), rules.len(), "one rule map per block position");
        Self { block, rules }
    }

    pub fn block(&self) -> &Block {
        &self.block
    }

    pub fn rules(&self) -> &[BTreeMap<LocalState, Rule>] {
        &self.rules
    }

    pub fn rule(&self, pos: usize, state: &LocalState) -> Option<Rule> {
        self.rules[pos].get(state).copied()
    }
}

/// Hard counter on a bin constrained only in expectation by the LP; quotes +∞ once full.
#[derive(Debug, Clone, PartialEq)]
pub struct Guard {
    pub bin: BinId,
    pub capacity: u32,
    pub members: Vec<usize>,
}

/// Per-run execution state of a [`PricingPolicy`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExecState {
    pub block_states: Vec<LocalState>,
    pub guard_counts: Vec<u32>,
}

/// What the policy does with the arriving element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quote {
    Price(Rule),
    /// A guarded bin is full; the element is quoted +∞.
    Ignored,
}

impl Quote {
    pub fn rule(&self) -> Rule {
        match self {
            Quote::Price(r) => *r,
            Quote::Ignored => Rule::REJECT,
        }
    }
}

/// Adaptive posted-price policy: independent block policies dispatched by element, plus
/// running counters on guarded bins.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingPolicy {
    num_elements: usize,
    blocks: Vec<BlockPolicy>,
    guards: Vec<Guard>,
    /// element -> (block index, position in block)
    dispatch: Vec<(usize, usize)>,
    /// element -> guards containing it
    guards_of: Vec<Vec<usize>>,
}

impl PricingPolicy {
    pub fn new(num_elements: usize, blocks: Vec<BlockPolicy>, guards: Vec<Guard>) -> Result<Self> {
        let mut dispatch = vec![None; num_elements];
        for (bi, bp) in blocks.iter().enumerate() {
            for (pos, &e) in bp.block.elements().iter().enumerate() {
                if e >= num_elements {
                    return Err(Error::PolicyMismatch(format!(
                        "{} lists element {e} but the instance has {num_elements}",
                        bp.block.scope()
                    )));
                }
                if dispatch[e].is_some() {
                    return Err(Error::PolicyMismatch(format!(
                        "element {e} is covered by more than one block"
                    )));
                }
                dispatch[e] = Some((bi, pos));
            }
        }
        let dispatch = dispatch
            .into_iter()
            .enumerate()
            .map(|(e, d)| {
                d.ok_or_else(|| Error::PolicyMismatch(format!("element {e} is not covered by any block")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut guards_of = vec![Vec::new(); num_elements];
        for (gi, g) in guards.iter().enumerate() {
            for &e in &g.members {
                if e >= num_elements {
                    return Err(Error::PolicyMismatch(format!(
                        "guard on bin {} lists element {e} out of range",
                        g.bin
                    )));
                }
                guards_of[e].push(gi);
            }
        }
        Ok(Self {
            num_elements,
            blocks,
            guards,
            dispatch,
            guards_of,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn blocks(&self) -> &[BlockPolicy] {
        &self.blocks
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    /// (block index, position) of an element.
    pub fn locate(&self, element: usize) -> (usize, usize) {
        self.dispatch[element]
    }

    pub fn start(&self) -> ExecState {
        ExecState {
            block_states: self.blocks.iter().map(|b| b.block.initial()).collect(),
            guard_counts: vec![0; self.guards.len()],
        }
    }

    pub fn quote(&self, st: &ExecState, element: usize) -> Result<Quote> {
        if self.guards_of[element]
            .iter()
            .any(|&g| st.guard_counts[g] >= self.guards[g].capacity)
        {
            return Ok(Quote::Ignored);
        }
        let (bi, pos) = self.dispatch[element];
        let bp = &self.blocks[bi];
        let state = &st.block_states[bi];
        let rule = bp.rule(pos, state).ok_or_else(|| {
            Error::PolicyMismatch(format!(
                "no rule for element {element} in state {state} of {}",
                bp.block.scope()
            ))
        })?;
        if !bp.block.can_accept(pos, state) {
            return Ok(Quote::Price(Rule::REJECT));
        }
        Ok(Quote::Price(rule))
    }

    pub fn commit(&self, st: &mut ExecState, element: usize, accepted: bool) {
        if !accepted {
            return;
        }
        let (bi, pos) = self.dispatch[element];
        let next = self.blocks[bi].block.step(pos, &st.block_states[bi]).next;
        st.block_states[bi] = next;
        for &g in &self.guards_of[element] {
            st.guard_counts[g] += 1;
        }
    }

    pub fn to_doc(&self) -> PolicyDoc {
        PolicyDoc {
            blocks: self
                .blocks
                .iter()
                .map(|bp| BlockDoc {
                    scope: bp.block.scope(),
                    rules: bp
                        .rules
                        .iter()
                        .enumerate()
                        .flat_map(|(pos, map)| {
                            let t = bp.block.elements()[pos];
                            map.iter().map(move |(s, r)| RuleDoc {
                                t,
                                state: s.clone(),
                                tau: Tau(r.tau),
                                p: r.p,
                            })
                        })
                        .collect(),
                })
                .collect(),
            guards: self
                .guards
                .iter()
                .map(|g| GuardDoc {
                    bin: g.bin,
                    capacity: g.capacity,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("policy documents always serialize")
    }

    /// Rebuilds a policy from its document against the instance it was solved for.
    pub fn from_doc(doc: &PolicyDoc, inst: &Instance) -> Result<Self> {
        let lam = inst.to_laminar()?;
        let mut blocks = Vec::with_capacity(doc.blocks.len());
        for bd in &doc.blocks {
            let block = resolve_block(bd.scope, inst, &lam)?;
            let width = block.initial().0.len();
            let mut rules = vec![BTreeMap::new(); block.len()];
            for r in &bd.rules {
                let pos = block.position_of(r.t).ok_or_else(|| {
                    Error::PolicyMismatch(format!("rule for element {} outside {}", r.t, bd.scope))
                })?;
                if r.state.0.len() != width {
                    return Err(Error::PolicyMismatch(format!(
                        "state {} has {} entries, {} expects {width}",
                        r.state,
                        r.state.0.len(),
                        bd.scope
                    )));
                }
                if !(0.0..=1.0).contains(&r.p) || r.tau.0.is_nan() {
                    return Err(Error::PolicyMismatch(format!(
                        "rule for element {} in state {} has tau {} p {}",
                        r.t, r.state, r.tau.0, r.p
                    )));
                }
                rules[pos].insert(r.state.clone(), Rule { tau: r.tau.0, p: r.p });
            }
            blocks.push(BlockPolicy::new(block, rules));
        }
        let mut guards = Vec::with_capacity(doc.guards.len());
        for g in &doc.guards {
            if g.bin.0 >= lam.bins().len() {
                return Err(Error::PolicyMismatch(format!("guard on unknown bin {}", g.bin)));
            }
            guards.push(Guard {
                bin: g.bin,
                capacity: g.capacity,
                members: lam.bin(g.bin).members.clone(),
            });
        }
        Self::new(lam.num_elements(), blocks, guards)
    }

    pub fn from_json(json: &str, inst: &Instance) -> Result<Self> {
        let doc: PolicyDoc = serde_json::from_str(json)?;
        Self::from_doc(&doc, inst)
    }
}

fn resolve_block(scope: BlockScope, inst: &Instance, lam: &LaminarInstance) -> Result<Block> {
    match scope {
        BlockScope::Bin(b) if b.0 < lam.bins().len() => Ok(Block::for_bin(lam, b)),
        BlockScope::Element(e) if e < lam.num_elements() => Ok(Block::singleton(e)),
        BlockScope::Type(j) => match inst.as_production() {
            Some(p) if j < p.num_types() => Ok(Block::for_type(p, j)),
            Some(_) => Err(Error::PolicyMismatch(format!("unknown type {j}"))),
            None => Err(Error::PolicyMismatch(format!(
                "{scope} needs a production instance"
            ))),
        },
        _ => Err(Error::PolicyMismatch(format!("{scope} does not exist in the instance"))),
    }
}

/// A price that serializes `+∞` as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tau(pub f64);

impl Serialize for Tau {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Tau {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Tau(x)),
            Raw::Str(s) if s == "inf" => Ok(Tau(f64::INFINITY)),
            Raw::Str(s) => Err(de::Error::custom(format!("price must be a number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDoc {
    pub t: usize,
    pub state: LocalState,
    pub tau: Tau,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub scope: BlockScope,
    pub rules: Vec<RuleDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardDoc {
    pub bin: BinId,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDoc {
    pub blocks: Vec<BlockDoc>,
    pub guards: Vec<GuardDoc>,
}
