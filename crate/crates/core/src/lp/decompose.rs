//! Lagrangian solver for LPs whose blocks are coupled only through a laminar family of
//! expectation rows.
//!
//! Each block's best welfare as a function of its expected usage is concave and piecewise
//! linear; its vertices are the optimal policies of the block's Bellman recursion with every
//! value shifted by a price `μ`, found by breakpoint search over `μ`. Filling usage greedily in
//! order of decreasing marginal welfare is optimal for laminar capacity rows, and a mixture of
//! two adjacent vertex policies realises any usage on a segment. The duals read off the greedy
//! give an upper bound that certifies the result.

use std::collections::BTreeMap;

use super::build::{BlockLayout, BuiltLp};
use super::model::{LpSolution, LpStatus};
use crate::dp::solve_subproblem_dp;
use crate::error::{Error, Result};
use crate::model::{DiscreteDistribution, LocalState};

const SLOPE_TOL: f64 = 1e-12;
const USAGE_TOL: f64 = 1e-12;
/// Relative gap accepted between the primal value and the dual bound.
pub const GAP_TOL: f64 = 1e-7;
const TIE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
struct Occupancy {
    y: Vec<BTreeMap<LocalState, f64>>,
    x: Vec<BTreeMap<LocalState, Vec<f64>>>,
    welfare: f64,
    usage: f64,
}

fn occupancy(layout: &BlockLayout, dists: &[DiscreteDistribution], shift: f64) -> Result<Occupancy> {
    let block = &layout.block;
    let table = solve_subproblem_dp(block, dists, shift, usize::MAX)?;
    let m = block.len();
    let mut y: Vec<BTreeMap<LocalState, f64>> = layout
        .layers
        .iter()
        .map(|l| l.iter().map(|s| (s.clone(), 0.0)).collect())
        .collect();
    let mut x: Vec<BTreeMap<LocalState, Vec<f64>>> = Vec::with_capacity(m);
    y[0].insert(block.initial(), 1.0);
    let (mut welfare, mut usage) = (0.0, 0.0);
    for pos in 0..m {
        let dist = &dists[block.elements()[pos]];
        let mut xs = BTreeMap::new();
        let current: Vec<(LocalState, f64)> = y[pos].iter().map(|(s, &p)| (s.clone(), p)).collect();
        for (s, mass) in current {
            let tr = block.step(pos, &s);
            let mut row = vec![0.0; dist.len()];
            let mut acc = 0.0;
            if tr.feasible && mass > 0.0 {
                let skip = table.value(pos + 1, &s).expect("feasible state");
                let take = table.value(pos + 1, &tr.next).expect("feasible successor");
                for (a, atom) in dist.atoms().iter().enumerate() {
                    if atom.value - shift + take >= skip {
                        row[a] = mass;
                        acc += atom.prob;
                        welfare += mass * atom.prob * atom.value;
                    }
                }
                *y[pos + 1].get_mut(&tr.next).expect("successor in next layer") += mass * acc;
            }
            usage += mass * acc;
            *y[pos + 1].get_mut(&s).expect("skip keeps the state") += mass * (1.0 - acc);
            xs.insert(s, row);
        }
        x.push(xs);
    }
    Ok(Occupancy {
        y,
        x,
        welfare,
        usage,
    })
}

/// Concave welfare-versus-usage frontier of one block, vertices by increasing usage.
#[derive(Debug, Clone)]
struct Frontier {
    vertices: Vec<Occupancy>,
}

impl Frontier {
    fn slope(&self, k: usize) -> f64 {
        let (a, b) = (&self.vertices[k], &self.vertices[k + 1]);
        (b.welfare - a.welfare) / (b.usage - a.usage)
    }

    fn segments(&self) -> usize {
        self.vertices.len() - 1
    }
}

fn lagrangian(o: &Occupancy, mu: f64) -> f64 {
    o.welfare - mu * o.usage
}

fn frontier(layout: &BlockLayout, dists: &[DiscreteDistribution]) -> Result<Frontier> {
    let top = layout
        .block
        .elements()
        .iter()
        .map(|&e| dists[e].max_value())
        .fold(0.0f64, f64::max);
    let empty = occupancy(layout, dists, top + 1.0)?;
    let full = occupancy(layout, dists, 0.0)?;
    let mut inner = Vec::new();
    if full.usage > empty.usage + USAGE_TOL {
        explore(layout, dists, &full, &empty, &mut inner, 0)?;
    }
    let mut vertices = vec![empty];
    inner.sort_by(|a: &Occupancy, b| a.usage.total_cmp(&b.usage));
    for o in inner.into_iter().chain(std::iter::once(full)) {
        if o.usage > vertices.last().expect("non-empty").usage + USAGE_TOL {
            vertices.push(o);
        }
    }
    Ok(Frontier { vertices })
}

/// Eisner–Severance search between a high-usage vertex `a` and a low-usage vertex `b`.
fn explore(
    layout: &BlockLayout,
    dists: &[DiscreteDistribution],
    a: &Occupancy,
    b: &Occupancy,
    out: &mut Vec<Occupancy>,
    depth: usize,
) -> Result<()> {
    if depth > 10_000 {
        return Err(Error::CorruptSolution(format!(
            "breakpoint search of {} does not terminate",
            layout.block.scope()
        )));
    }
    let mu = (a.welfare - b.welfare) / (a.usage - b.usage);
    let mid = occupancy(layout, dists, mu)?;
    let line = lagrangian(a, mu);
    let above = lagrangian(&mid, mu) > line + 1e-11 * (1.0 + line.abs());
    let between = mid.usage > b.usage + USAGE_TOL && mid.usage < a.usage - USAGE_TOL;
    if above && between {
        explore(layout, dists, a, &mid, out, depth + 1)?;
        explore(layout, dists, &mid, b, out, depth + 1)?;
        out.push(mid);
    }
    Ok(())
}

/// Dual information of a decomposed solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Upper bound on the LP optimum from the greedy duals.
    pub dual_bound: f64,
    /// Price on each coupling row.
    pub row_prices: Vec<f64>,
    /// Total price seen by each block.
    pub block_shifts: Vec<f64>,
    /// Number of frontier vertices per block.
    pub vertices: Vec<usize>,
}

pub fn solve_decomposed(built: &BuiltLp) -> Result<(LpSolution, Certificate)> {
    let dists = &built.dists;
    let frontiers = built
        .blocks
        .iter()
        .map(|l| frontier(l, dists))
        .collect::<Result<Vec<_>>>()?;

    let nb = built.blocks.len();
    let mut rows_of = vec![Vec::new(); nb];
    for (c, row) in built.coupling.iter().enumerate() {
        for &b in &row.blocks {
            rows_of[b].push(c);
        }
    }
    let mut slack: Vec<f64> = built.coupling.iter().map(|c| c.rhs).collect();
    let mut saturated_at: Vec<Option<f64>> = vec![None; built.coupling.len()];

    let mut segs: Vec<(f64, usize, usize)> = Vec::new();
    for (b, f) in frontiers.iter().enumerate() {
        for k in 0..f.segments() {
            segs.push((f.slope(k), b, k));
        }
    }
    segs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    // Slopes equal up to rounding are served in block order, so that equivalent encodings of
    // the same blocks end at the same vertex.
    let mut start = 0;
    while start < segs.len() {
        let lead = segs[start].0;
        let mut end = start + 1;
        while end < segs.len() && lead - segs[end].0 <= TIE_RTOL * (1.0 + lead.abs()) {
            end += 1;
        }
        segs[start..end].sort_by(|x, y| x.1.cmp(&y.1).then(x.2.cmp(&y.2)));
        start = end;
    }

    // Usage reached so far in each block: (segment index, fraction of it).
    let mut reached: Vec<(usize, f64)> = vec![(0, 0.0); nb];
    let mut blocked = vec![false; nb];
    for &(slope, b, k) in &segs {
        if slope <= SLOPE_TOL || blocked[b] {
            continue;
        }
        debug_assert_eq!(reached[b].0, k);
        let f = &frontiers[b];
        let len = f.vertices[k + 1].usage - f.vertices[k].usage;
        let room = rows_of[b].iter().map(|&c| slack[c]).fold(f64::INFINITY, f64::min).max(0.0);
        let take = len.min(room);
        for &c in &rows_of[b] {
            slack[c] -= take;
            let rhs = built.coupling[c].rhs;
            if saturated_at[c].is_none() && slack[c] <= 1e-12 * (1.0 + rhs) {
                saturated_at[c] = Some(slope);
            }
        }
        if take < len {
            reached[b] = (k, take / len);
            blocked[b] = true;
        } else {
            reached[b] = (k + 1, 0.0);
        }
    }

    // Assemble the mixture in model variable order.
    let model = &built.model;
    let mut values = vec![0.0; model.num_vars()];
    for (b, layout) in built.blocks.iter().enumerate() {
        let f = &frontiers[b];
        let (k, theta) = reached[b];
        let lo = &f.vertices[k];
        let hi = f.vertices.get(k + 1).unwrap_or(lo);
        let mix = |p: f64, q: f64| (1.0 - theta) * p + theta * q;
        for (pos, layer) in layout.layers.iter().enumerate() {
            for s in layer {
                values[layout.y[pos][s]] = mix(lo.y[pos][s], hi.y[pos][s]);
            }
        }
        for (pos, map) in layout.x.iter().enumerate() {
            for (s, vars) in map {
                for (a, &v) in vars.iter().enumerate() {
                    values[v] = mix(lo.x[pos][s][a], hi.x[pos][s][a]);
                }
            }
        }
        if let Some(u) = built.usage[b] {
            values[u] = mix(lo.usage, hi.usage);
        }
    }
    let residual = model.max_violation(&values);
    if residual > 1e-7 {
        return Err(Error::CorruptSolution(format!(
            "decomposed solution leaves a residual of {residual:e}"
        )));
    }
    let objective = model.objective_value(&values);

    // Duals: a saturated row carries its saturation slope minus that of the nearest
    // saturated row strictly containing it.
    let sigma: Vec<f64> = saturated_at.iter().map(|s| s.unwrap_or(0.0)).collect();
    let contains = |outer: usize, inner: usize| {
        outer != inner
            && built.coupling[inner]
                .blocks
                .iter()
                .all(|b| built.coupling[outer].blocks.contains(b))
            && built.coupling[outer].blocks.len() > built.coupling[inner].blocks.len()
    };
    let row_prices: Vec<f64> = (0..built.coupling.len())
        .map(|c| {
            let outer = (0..built.coupling.len())
                .filter(|&o| contains(o, c))
                .map(|o| sigma[o])
                .fold(0.0f64, f64::max);
            (sigma[c] - outer).max(0.0)
        })
        .collect();
    let block_shifts: Vec<f64> = rows_of
        .iter()
        .map(|rows| rows.iter().map(|&c| row_prices[c]).sum())
        .collect();
    let mut dual_bound: f64 = built
        .coupling
        .iter()
        .zip(&row_prices)
        .map(|(c, &p)| p * c.rhs)
        .sum();
    for (b, layout) in built.blocks.iter().enumerate() {
        dual_bound += solve_subproblem_dp(&layout.block, dists, block_shifts[b], usize::MAX)?.initial_value();
    }
    if dual_bound < objective - GAP_TOL * (1.0 + objective.abs())
        || dual_bound - objective > GAP_TOL * (1.0 + objective.abs())
    {
        return Err(Error::CorruptSolution(format!(
            "decomposition gap: primal {objective}, dual bound {dual_bound}"
        )));
    }
    Ok((
        LpSolution {
            status: LpStatus::Optimal,
            objective,
            values,
            pivots: 0,
        },
        Certificate {
            dual_bound,
            row_prices,
            block_shifts,
            vertices: frontiers.iter().map(|f| f.vertices.len()).collect(),
        },
    ))
}
