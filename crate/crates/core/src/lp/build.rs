//! Builders for the optimal-policy LP, the ex-ante LP and the marking hierarchy.

use std::collections::{BTreeMap, BTreeSet};

use super::model::{LpModel, Relation};
use crate::error::{Error, Result};
use crate::model::{BinId, Block, BlockScope, DiscreteDistribution, LaminarInstance, LocalState, ProductionInstance};
use crate::rounding::Marking;

/// Variables of one point-wise feasible block inside a built LP.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLayout {
    pub block: Block,
    /// Feasible states per layer, `0..=len`.
    pub layers: Vec<Vec<LocalState>>,
    /// Forbidden neighbours per layer (layer 0 has none). Their `Y` is pinned to zero.
    pub forbidden: Vec<BTreeSet<LocalState>>,
    /// `Y` variable per layer and state, forbidden states included.
    pub y: Vec<BTreeMap<LocalState, usize>>,
    /// `X` variables per position and feasible state, one per atom of the arriving element.
    pub x: Vec<BTreeMap<LocalState, Vec<usize>>>,
}

/// A capacity row summed over whole blocks, constrained only in expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub name: String,
    pub bin: Option<BinId>,
    pub blocks: Vec<usize>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpKind {
    Optimal,
    ExAnte { scale: f64 },
    Hierarchy { scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltLp {
    pub kind: LpKind,
    pub model: LpModel,
    pub blocks: Vec<BlockLayout>,
    /// Laminar family of expectation rows over blocks.
    pub coupling: Vec<Coupling>,
    /// Per block, the variable carrying its expected number of acceptances (ex-ante LP only).
    pub usage: Vec<Option<usize>>,
    pub dists: Vec<DiscreteDistribution>,
}

fn state_key(s: &LocalState) -> String {
    let parts: Vec<String> = s
        .0
        .iter()
        .map(|&x| if x < 0 { format!("m{}", -x) } else { x.to_string() })
        .collect();
    format!("{{{}}}", parts.join("."))
}

fn scope_key(scope: BlockScope) -> String {
    match scope {
        BlockScope::Bin(b) => format!("bin{b}"),
        BlockScope::Type(j) => format!("type{j}"),
        BlockScope::Element(e) => format!("elem{e}"),
    }
}

fn add_block(
    model: &mut LpModel,
    block: Block,
    dists: &[DiscreteDistribution],
    cap: usize,
) -> Result<BlockLayout> {
    let layers = block.layers(cap)?;
    let m = block.len();
    let mut forbidden = vec![BTreeSet::new()];
    forbidden.extend(block.layer_forbidden(&layers));
    let label = scope_key(block.scope());
    let time = |pos: usize| {
        if pos < m {
            format!("Y({}", block.elements()[pos])
        } else {
            format!("Yend({label}")
        }
    };

    let mut y = Vec::with_capacity(m + 1);
    for pos in 0..=m {
        let mut map = BTreeMap::new();
        for s in &layers[pos] {
            map.insert(s.clone(), model.add_nonneg(format!("{},{})", time(pos), state_key(s)))?);
        }
        for s in &forbidden[pos] {
            map.insert(s.clone(), model.add_var(format!("{},{})", time(pos), state_key(s)), 0.0, 0.0)?);
        }
        y.push(map);
    }

    let mut x = Vec::with_capacity(m);
    for pos in 0..m {
        let t = block.elements()[pos];
        let dist = &dists[t];
        let mut map = BTreeMap::new();
        for s in &layers[pos] {
            let mut vars = Vec::with_capacity(dist.len());
            for (a, atom) in dist.atoms().iter().enumerate() {
                let v = model.add_nonneg(format!("X({t},{},{a})", state_key(s)))?;
                model.set_objective(v, atom.prob * atom.value);
                model.add_constraint(
                    format!("xy({t},{},{a})", state_key(s)),
                    vec![(v, 1.0), (y[pos][s], -1.0)],
                    Relation::Le,
                    0.0,
                );
                vars.push(v);
            }
            map.insert(s.clone(), vars);
        }
        x.push(map);
    }

    model.add_constraint(
        format!("init({label})"),
        vec![(y[0][&layers[0][0]], 1.0)],
        Relation::Eq,
        1.0,
    );
    for pos in 0..m {
        let t = block.elements()[pos];
        let probs: Vec<f64> = dists[t].atoms().iter().map(|a| a.prob).collect();
        // Y_{next}(s') = Y(s') − E[X(s')] + Σ_{s → s'} E[X(s)]
        let mut rows: BTreeMap<&LocalState, Vec<(usize, f64)>> = y[pos + 1]
            .iter()
            .map(|(s, &v)| (s, vec![(v, 1.0)]))
            .collect();
        for s in &layers[pos] {
            let row = rows.get_mut(s).expect("skipping keeps the state reachable");
            row.push((y[pos][s], -1.0));
            for (a, &v) in x[pos][s].iter().enumerate() {
                row.push((v, probs[a]));
            }
        }
        for s in &layers[pos] {
            let next = block.step(pos, s).next;
            let row = rows.get_mut(&next).expect("successor is feasible or forbidden");
            for (a, &v) in x[pos][s].iter().enumerate() {
                row.push((v, -probs[a]));
            }
        }
        for (s, terms) in rows {
            model.add_constraint(format!("upd({t},{})", state_key(s)), terms, Relation::Eq, 0.0);
        }
    }

    Ok(BlockLayout {
        block,
        layers,
        forbidden,
        y,
        x,
    })
}

impl BlockLayout {
    /// `Σ_{s,a} p_a X(t,s,a)` over the whole block: its expected number of acceptances.
    pub fn usage_terms(&self, dists: &[DiscreteDistribution]) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (pos, map) in self.x.iter().enumerate() {
            let dist = &dists[self.block.elements()[pos]];
            for vars in map.values() {
                for (a, &v) in vars.iter().enumerate() {
                    out.push((v, dist.atoms()[a].prob));
                }
            }
        }
        out
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("capacity scale must lie in (0,1], got {scale}")))
    }
}

/// Exact LP over the full point-wise feasible polytope.
pub fn build_lp_optimal(inst: &LaminarInstance, cap: usize) -> Result<BuiltLp> {
    let mut model = LpModel::new();
    let layout = add_block(&mut model, Block::whole(inst), inst.elements(), cap)?;
    Ok(BuiltLp {
        kind: LpKind::Optimal,
        model,
        blocks: vec![layout],
        coupling: Vec::new(),
        usage: vec![None],
        dists: inst.elements().to_vec(),
    })
}

/// Per-type point-wise blocks with the shipping capacity enforced in expectation.
pub fn build_lp_exante(p: &ProductionInstance, capacity_scale: f64, cap: usize) -> Result<BuiltLp> {
    check_scale(capacity_scale)?;
    let mut model = LpModel::new();
    let mut blocks = Vec::new();
    let mut usage = Vec::new();
    let mut n_vars = Vec::new();
    for j in 0..p.num_types() {
        let block = Block::for_type(p, j);
        if block.is_empty() {
            continue;
        }
        let layout = add_block(&mut model, block, &p.elements, cap)?;
        let n = model.add_nonneg(format!("N({j})"))?;
        let mut terms = layout.usage_terms(&p.elements);
        terms.push((n, -1.0));
        model.add_constraint(format!("dem({j})"), terms, Relation::Le, 0.0);
        blocks.push(layout);
        usage.push(Some(n));
        n_vars.push((n, 1.0));
    }
    let rhs = capacity_scale * p.shipping as f64;
    model.add_constraint("ship", n_vars, Relation::Le, rhs);
    let coupling = vec![Coupling {
        name: "ship".into(),
        bin: None,
        blocks: (0..blocks.len()).collect(),
        rhs,
    }];
    Ok(BuiltLp {
        kind: LpKind::ExAnte {
            scale: capacity_scale,
        },
        model,
        blocks,
        coupling,
        usage,
        dists: p.elements.clone(),
    })
}

/// Point-wise blocks for maximal small bins and lone elements, expectation rows for large bins.
pub fn build_lp_hierarchy(
    inst: &LaminarInstance,
    mk: &Marking,
    capacity_scale: f64,
    cap: usize,
) -> Result<BuiltLp> {
    check_scale(capacity_scale)?;
    let v = mk.violations(inst);
    if !v.is_empty() {
        return Err(Error::InvalidMarking(v.join("; ")));
    }
    let mut model = LpModel::new();
    let mut blocks = Vec::new();
    let mut order: Vec<Block> = mk
        .small_maximal()
        .iter()
        .map(|&b| Block::for_bin(inst, b))
        .chain(mk.singletons().iter().map(|&e| Block::singleton(e)))
        .collect();
    order.sort_by_key(|b| b.elements()[0]);
    for block in order {
        blocks.push(add_block(&mut model, block, inst.elements(), cap)?);
    }
    let mut coupling = Vec::new();
    for &b in mk.large() {
        let members: Vec<usize> = (0..blocks.len())
            .filter(|&i| inst.contains(b, blocks[i].block.elements()[0]))
            .collect();
        let terms: Vec<(usize, f64)> = members
            .iter()
            .flat_map(|&i| blocks[i].usage_terms(inst.elements()))
            .collect();
        let rhs = capacity_scale * inst.bin(b).capacity as f64;
        let name = format!("large(bin{b})");
        model.add_constraint(name.clone(), terms, Relation::Le, rhs);
        coupling.push(Coupling {
            name,
            bin: Some(b),
            blocks: members,
            rhs,
        });
    }
    let usage = vec![None; blocks.len()];
    Ok(BuiltLp {
        kind: LpKind::Hierarchy {
            scale: capacity_scale,
        },
        model,
        blocks,
        coupling,
        usage,
        dists: inst.elements().to_vec(),
    })
}
