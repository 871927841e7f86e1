//! Virtual values and ironing. Pricing the ironed instance for welfare gives a
//! revenue-oriented policy for the original one.

use laminar_pricing::dp::solve_full_dp;
use laminar_pricing::model::{BinSpec, DiscreteDistribution, Instance, LaminarInstance, DEFAULT_STATE_CAP};
use laminar_pricing::myerson::{iron, revenue_transform, virtual_values};

fn main() -> laminar_pricing::Result<()> {
    let irregular = DiscreteDistribution::new(vec![(1.0, 0.45), (2.0, 0.1), (10.0, 0.45)])?;
    println!("raw virtual values {:?}", virtual_values(&irregular));
    let t = iron(&irregular)?;
    for (v, phi) in &t.mapping {
        println!("  ironed({v}) = {phi:.6}");
    }
    println!("ironed distribution {:?}", t.distribution().atoms());

    let inst = LaminarInstance::new(
        vec![irregular, DiscreteDistribution::uniform(&[1.0, 2.0])?],
        &BinSpec::new(1, vec![BinSpec::leaf(0), BinSpec::leaf(1)]),
    )?;
    let Instance::Laminar(ironed) = revenue_transform(&Instance::Laminar(inst.clone()))? else {
        unreachable!("laminar input stays laminar")
    };
    let (welfare, _) = solve_full_dp(&inst, DEFAULT_STATE_CAP)?;
    let (revenue, _) = solve_full_dp(&ironed, DEFAULT_STATE_CAP)?;
    println!("optimal welfare {:.4}, optimal expected virtual surplus {:.4}", welfare.initial_value(), revenue.initial_value());
    Ok(())
}
