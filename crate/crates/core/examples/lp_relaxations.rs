//! The three relaxations side by side on a production instance: the exact LP over joint
//! states, the ex-ante LP with one expectation row for shipping, and the hierarchy LP under
//! the marking chosen for a given δ.

use laminar_pricing::dp::solve_production_dp;
use laminar_pricing::lp::{
    build_lp_exante, build_lp_hierarchy, build_lp_optimal, solve_built, solve_decomposed, LpBackend,
};
use laminar_pricing::model::{DiscreteDistribution, ProductionInstance, DEFAULT_STATE_CAP};
use laminar_pricing::rounding::mark_laminar;

fn main() -> laminar_pricing::Result<()> {
    let coin = DiscreteDistribution::new(vec![(0.0, 0.5), (2.0, 0.5)])?;
    let sure = DiscreteDistribution::deterministic(1.0);
    let lumpy = DiscreteDistribution::new(vec![(1.0, 0.6), (3.0, 0.3), (6.0, 0.1)])?;
    let p = ProductionInstance::new(
        vec![sure.clone(), coin.clone(), lumpy.clone(), sure, coin, lumpy],
        vec![0, 1, 0, 1, 0, 1],
        vec![0, 0, 1, 1, 2, 2],
        vec![vec![1, 2, 2], vec![1, 1, 3]],
        3,
    )?;
    let lam = p.to_laminar()?;

    let dp = solve_production_dp(&p);
    let lp1 = solve_built(&build_lp_optimal(&lam, DEFAULT_STATE_CAP)?, LpBackend::Simplex)?;
    let exante = build_lp_exante(&p, 1.0, DEFAULT_STATE_CAP)?;
    let lp2 = solve_built(&exante, LpBackend::Simplex)?;
    let (_, cert) = solve_decomposed(&exante)?;
    let mk = mark_laminar(&lam, 0.5)?;
    let lp4 = solve_built(&build_lp_hierarchy(&lam, &mk, 1.0, DEFAULT_STATE_CAP)?, LpBackend::Simplex)?;

    println!("online optimum       {dp:.6}");
    println!("exact LP             {:.6} ({} pivots)", lp1.objective, lp1.pivots);
    println!("ex-ante LP           {:.6} ({} pivots)", lp2.objective, lp2.pivots);
    println!("  dual bound {:.6}, shipping price {:.4}", cert.dual_bound, cert.row_prices[0]);
    println!("hierarchy LP, δ=0.5  {:.6} (large bins {:?})", lp4.objective, mk.large());
    Ok(())
}
