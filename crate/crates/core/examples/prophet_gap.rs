//! Online optimum against the offline (prophet) benchmark on a laminar instance, exactly
//! and by seeded Monte Carlo.

use laminar_pricing::eval::{prophet_exact, prophet_value, simulate};
use laminar_pricing::dp::solve_full_dp;
use laminar_pricing::model::{BinSpec, DiscreteDistribution, LaminarInstance, DEFAULT_STATE_CAP};

fn main() -> laminar_pricing::Result<()> {
    let dists = vec![
        DiscreteDistribution::deterministic(1.0),
        DiscreteDistribution::new(vec![(0.0, 0.75), (4.0, 0.25)])?,
        DiscreteDistribution::uniform(&[0.0, 2.0])?,
        DiscreteDistribution::new(vec![(0.0, 0.9), (10.0, 0.1)])?,
    ];
    let tree = BinSpec::new(
        2,
        vec![
            BinSpec::new(1, vec![BinSpec::leaf(0), BinSpec::leaf(1)]).node(),
            BinSpec::leaf(2),
            BinSpec::leaf(3),
        ],
    );
    let inst = LaminarInstance::new(dists, &tree)?;
    let (table, policy) = solve_full_dp(&inst, DEFAULT_STATE_CAP)?;
    let prophet = prophet_exact(&inst, 1 << 16)?;
    let mc = prophet_value(&inst, 200_000, 11);
    let online = simulate(&policy, &inst, 200_000, 11)?;
    println!("online optimum {:.4} (simulated {:.4} ± {:.4})", table.initial_value(), online.mean_welfare, online.stderr);
    println!("prophet {prophet:.4} (simulated {:.4} ± {:.4})", mc.mean, mc.stderr);
    println!("ratio {:.4}", table.initial_value() / prophet);
    Ok(())
}
