//! Exhaustive check of the cylinder inequality E[∏ X_t] ≤ ∏ E[X_t] on production chains
//! under the optimal policy, with the concavity check on the same value tables.
//!
//! Unit-capacity chains pass; the cap-2 chain below does not, because the last two buyers
//! are both served only when the two coins land low.

use laminar_pricing::dp::{concavity_check, solve_subproblem_dp};
use laminar_pricing::eval::check_negative_cylinder;
use laminar_pricing::model::{Block, DiscreteDistribution, ProductionInstance, DEFAULT_STATE_CAP};

fn report(name: &str, p: &ProductionInstance) -> laminar_pricing::Result<()> {
    let block = Block::for_type(p, 0);
    for shift in [-1.0, 0.0, 0.7] {
        let rep = check_negative_cylinder(&block, &p.elements, shift, 1e-9)?;
        let table = solve_subproblem_dp(&block, &p.elements, shift, DEFAULT_STATE_CAP)?;
        let concave = concavity_check(&table)?.holds;
        println!(
            "{name} shift {shift:>4}: holds {} (worst {:?}, gap {:.4}, {} subsets), concave {concave}",
            rep.holds, rep.worst_subset, rep.gap, rep.subsets_checked
        );
    }
    Ok(())
}

fn main() -> laminar_pricing::Result<()> {
    let coin10 = DiscreteDistribution::uniform(&[0.0, 10.0])?;
    let dists = vec![
        coin10.clone(),
        coin10,
        DiscreteDistribution::deterministic(5.0),
        DiscreteDistribution::uniform(&[0.0, 3.0])?,
    ];
    let unit = ProductionInstance::new(dists.clone(), vec![0; 4], vec![0; 4], vec![vec![1]], 4)?;
    let two = ProductionInstance::new(dists, vec![0; 4], vec![0; 4], vec![vec![2]], 4)?;
    report("cap 1", &unit)?;
    report("cap 2", &two)?;
    Ok(())
}
