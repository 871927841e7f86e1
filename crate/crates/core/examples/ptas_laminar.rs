//! Marking, hierarchy LP and guarded composition on a two-level laminar instance: a large
//! root with loose direct elements over four small bins.
//!
//! Run with `cargo run --release --example ptas_laminar`.

use laminar_pricing::eval::simulate;
use laminar_pricing::model::{BinSpec, DiscreteDistribution, LaminarInstance, NodeSpec};
use laminar_pricing::ptas::{ptas_laminar, PtasConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> laminar_pricing::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let direct = 110;
    let mut nodes: Vec<NodeSpec> = (0..direct).map(BinSpec::leaf).collect();
    let mut next = direct;
    for cap in [3, 5, 8, 10] {
        nodes.push(BinSpec::new(cap, (next..next + 12).map(BinSpec::leaf).collect()).node());
        next += 12;
    }
    let dists = (0..next)
        .map(|_| {
            let hi = rng.random_range(2..=9) as f64;
            DiscreteDistribution::new(vec![(0.0, 0.3), (1.0, 0.4), (hi, 0.3)])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let inst = LaminarInstance::new(dists, &BinSpec::new(101, nodes))?;

    let out = ptas_laminar(&inst, &PtasConfig::new(0.2).with_delta(0.1))?;
    let mk = out.marking.as_ref().expect("laminar route records its marking");
    println!("branch {:?}; large bins {:?}; small blocks {:?}", out.branch, mk.large, mk.small_maximal);
    println!("{} singleton blocks, {} guards", mk.singletons.len(), out.policy.guards().len());
    println!("hierarchy LP at scale 0.8: {:.4}", out.lp_objective);

    let rep = simulate(&out.policy, &inst, 100_000, 3)?;
    println!(
        "welfare {:.4} ± {:.4}; ignored {:.2e}; guard hit rate {:.2e}; violations {}",
        rep.mean_welfare,
        rep.stderr,
        rep.ignored_fraction,
        rep.guard_hit_rate,
        rep.total_violations()
    );
    Ok(())
}
