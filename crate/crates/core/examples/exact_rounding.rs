//! Turning an LP solution into posted prices: every reachable (arrival, state) pair gets a
//! price and a tie-break probability, and the exact forward pass of the resulting policy
//! reproduces the LP's state probabilities.

use laminar_pricing::eval::evaluate_block;
use laminar_pricing::lp::{build_lp_exante, solve};
use laminar_pricing::model::{DiscreteDistribution, ProductionInstance, DEFAULT_STATE_CAP};
use laminar_pricing::rounding::extract_pricing;

fn main() -> laminar_pricing::Result<()> {
    let dists = vec![
        DiscreteDistribution::uniform(&[1.0, 2.0])?,
        DiscreteDistribution::new(vec![(0.0, 0.5), (2.0, 0.5)])?,
        DiscreteDistribution::uniform(&[1.0, 2.0, 3.0])?,
        DiscreteDistribution::deterministic(1.5),
    ];
    let p = ProductionInstance::new(dists, vec![0, 1, 0, 1], vec![0, 0, 1, 1], vec![vec![1, 2], vec![1, 1]], 2)?;
    // scaled shipping makes the ex-ante row fractional
    let built = build_lp_exante(&p, 0.6, DEFAULT_STATE_CAP)?;
    let sol = solve(&built.model)?;
    println!("scaled ex-ante LP {:.6}", sol.objective);

    let policies = extract_pricing(&sol, &built)?;
    let mut worst: f64 = 0.0;
    let mut total = 0.0;
    for (layout, bp) in built.blocks.iter().zip(&policies) {
        println!("{}:", bp.block().scope());
        for (pos, rules) in bp.rules().iter().enumerate() {
            for (s, r) in rules {
                println!("  arrival {pos} sold {s}: tau {} p {:.4}", r.tau, r.p);
            }
        }
        let (welfare, trace) = evaluate_block(bp, &built.dists)?;
        total += welfare;
        for (pos, vars) in layout.y.iter().enumerate() {
            for (s, &v) in vars {
                let got = trace[pos].get(s).copied().unwrap_or(0.0);
                worst = worst.max((got - sol.values[v]).abs());
            }
        }
    }
    println!("block welfare {total:.6}, largest state-probability gap {worst:.2e}");
    Ok(())
}
