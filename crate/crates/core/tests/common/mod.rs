//! Random instance generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use laminar_pricing::model::{BinSpec, DiscreteDistribution, LaminarInstance, NodeSpec, ProductionInstance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distinct values from a small grid, random masses summing to one.
pub fn random_dist(rng: &mut impl Rng, max_atoms: usize, lo: i32, hi: i32) -> DiscreteDistribution {
    let k = rng.random_range(1..=max_atoms);
    let mut grid: Vec<i32> = (lo..=hi).collect();
    grid.shuffle(rng);
    let mut vals: Vec<f64> = grid[..k].iter().map(|&v| v as f64 * 0.5).collect();
    vals.sort_by(f64::total_cmp);
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(1..=8) as f64).collect();
    let total: f64 = w.iter().sum();
    let mut probs: Vec<f64> = w.iter().map(|x| x / total).collect();
    let head: f64 = probs[..k - 1].iter().sum();
    probs[k - 1] = 1.0 - head;
    DiscreteDistribution::new(vals.into_iter().zip(probs).collect()).expect("generated distribution is valid")
}

/// At most `max_n` elements, a root with up to three child bins, each optionally holding one
/// more bin when `max_depth` allows.
pub fn random_laminar(rng: &mut impl Rng, max_n: usize, max_atoms: usize, max_depth: usize, max_cap: u32) -> LaminarInstance {
    let n = rng.random_range(1..=max_n);
    let dists = (0..n).map(|_| random_dist(rng, max_atoms, 0, 8)).collect();
    let mut slots: Vec<Vec<usize>> = vec![Vec::new(); 4];
    for e in 0..n {
        let s = if max_depth < 2 { 0 } else { rng.random_range(0..4) };
        slots[s].push(e);
    }
    let mut children: Vec<NodeSpec> = slots[0].iter().map(|&e| BinSpec::leaf(e)).collect();
    for slot in &slots[1..] {
        if slot.is_empty() {
            continue;
        }
        let cap = rng.random_range(1..=max_cap);
        if max_depth >= 3 && slot.len() >= 2 && rng.random_bool(0.5) {
            let split = rng.random_range(1..slot.len());
            let inner = BinSpec::new(
                rng.random_range(1..=max_cap),
                slot[..split].iter().map(|&e| BinSpec::leaf(e)).collect(),
            );
            let mut c: Vec<NodeSpec> = vec![inner.node()];
            c.extend(slot[split..].iter().map(|&e| BinSpec::leaf(e)));
            children.push(BinSpec::new(cap, c).node());
        } else {
            children.push(BinSpec::new(cap, slot.iter().map(|&e| BinSpec::leaf(e)).collect()).node());
        }
    }
    let root_cap = rng.random_range(1..=max_cap);
    LaminarInstance::new(dists, &BinSpec::new(root_cap, children)).expect("generated tree is valid")
}

pub fn random_production(rng: &mut impl Rng, n: usize, types: usize, days: usize, max_stock: u32, shipping: u32) -> ProductionInstance {
    let dists = (0..n).map(|_| random_dist(rng, 3, 0, 8)).collect();
    let tys = (0..n).map(|_| rng.random_range(0..types)).collect();
    let mut ds: Vec<usize> = (0..n).map(|_| rng.random_range(0..days)).collect();
    ds.sort_unstable();
    let production = (0..types)
        .map(|_| {
            let mut acc = 0;
            (0..days)
                .map(|_| {
                    acc += rng.random_range(0..=max_stock);
                    acc
                })
                .collect()
        })
        .collect();
    ProductionInstance::new(dists, tys, ds, production, shipping).expect("generated production instance is valid")
}

/// Optimal online welfare by recursion over the load of every bin, written independently of
/// the library's block machinery.
pub fn oracle_dp(inst: &LaminarInstance) -> f64 {
    fn go(inst: &LaminarInstance, t: usize, load: &mut Vec<u32>, memo: &mut HashMap<(usize, Vec<u32>), f64>) -> f64 {
        if t == inst.num_elements() {
            return 0.0;
        }
        if let Some(&v) = memo.get(&(t, load.clone())) {
            return v;
        }
        let skip = go(inst, t + 1, load, memo);
        let path = inst.element_path(t);
        let fits = path.iter().all(|b| load[b.0] < inst.bin(*b).capacity);
        let v = if fits {
            path.iter().for_each(|b| load[b.0] += 1);
            let take = go(inst, t + 1, load, memo);
            path.iter().for_each(|b| load[b.0] -= 1);
            inst.distribution(t)
                .atoms()
                .iter()
                .map(|a| a.prob * (a.value + take).max(skip))
                .sum()
        } else {
            skip
        };
        memo.insert((t, load.clone()), v);
        v
    }
    go(inst, 0, &mut vec![0; inst.bins().len()], &mut HashMap::new())
}

/// `Σ_e E[max(v_e, 0)]`, an upper bound on any policy's welfare.
pub fn sum_of_positive_means(inst: &LaminarInstance) -> f64 {
    inst.elements()
        .iter()
        .map(|d| d.atoms().iter().map(|a| a.prob * a.value.max(0.0)).sum::<f64>())
        .sum()
}
