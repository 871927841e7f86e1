//! Writes a relaxation in the plain-text LP format, parses it back and re-solves it.

use laminar_pricing::lp::{build_lp_exante, parse_lp, solve, write_lp};
use laminar_pricing::model::{DiscreteDistribution, ProductionInstance, DEFAULT_STATE_CAP};

fn main() -> laminar_pricing::Result<()> {
    let p = ProductionInstance::new(
        vec![
            DiscreteDistribution::deterministic(1.0),
            DiscreteDistribution::new(vec![(0.0, 0.5), (2.0, 0.5)])?,
        ],
        vec![0, 0],
        vec![0, 0],
        vec![vec![2]],
        1,
    )?;
    let built = build_lp_exante(&p, 1.0, DEFAULT_STATE_CAP)?;
    let text = write_lp(&built.model)?;
    print!("{text}");
    let again = parse_lp(&text)?;
    println!("\\ objective {} after round trip {}", solve(&built.model)?.objective, solve(&again)?.objective);
    Ok(())
}
