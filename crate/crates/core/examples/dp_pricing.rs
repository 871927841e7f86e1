//! Optimal online pricing on a small laminar instance by exhaustive Bellman recursion.
//!
//! Prints the value table and the posted price quoted to each arrival from each state.

use laminar_pricing::dp::{price, solve_full_dp};
use laminar_pricing::model::{BinSpec, Block, DiscreteDistribution, LaminarInstance, DEFAULT_STATE_CAP};

fn main() -> laminar_pricing::Result<()> {
    let dists = vec![
        DiscreteDistribution::uniform(&[1.0, 3.0])?,
        DiscreteDistribution::new(vec![(0.0, 0.5), (4.0, 0.5)])?,
        DiscreteDistribution::deterministic(2.0),
        DiscreteDistribution::uniform(&[0.0, 2.0, 5.0])?,
    ];
    // root cap 2 over {0, 1, 2, 3}; elements 1 and 2 also share a bin of cap 1
    let tree = BinSpec::new(
        2,
        vec![
            BinSpec::leaf(0),
            BinSpec::new(1, vec![BinSpec::leaf(1), BinSpec::leaf(2)]).node(),
            BinSpec::leaf(3),
        ],
    );
    let inst = LaminarInstance::new(dists, &tree)?;
    let (table, _policy) = solve_full_dp(&inst, DEFAULT_STATE_CAP)?;
    println!("optimal online welfare {:.4}", table.initial_value());

    let block = Block::whole(&inst);
    for pos in 0..block.len() {
        println!("arrival {pos}:");
        for (s, v) in table.layer(pos) {
            println!("  remaining {s}  V = {v:.4}  price {}", price(&block, &table, pos, s));
        }
    }
    Ok(())
}
