//! Searches small laminar trees for a pick that lowers the optimal price of a later element.
//!
//! Run with `cargo run --example counterexample_search`.

use laminar_pricing::eval::{search_dependency_counterexample, SearchSpace};

fn main() -> laminar_pricing::Result<()> {
    let space = SearchSpace::five_elements();
    let out = search_dependency_counterexample(&space)?;
    println!("examined {} trees, {} hits", out.examined, out.hits.len());
    match &out.canonical {
        Some(h) => {
            println!(
                "canonical hit: price {} after a pick, {} after a skip",
                h.price_after_pick, h.price_after_skip
            );
            println!("{}", serde_json::to_string(&h.tree)?);
        }
        None => println!("no hit with prices (1, 1.25)"),
    }
    for h in out.hits.iter().take(5) {
        println!(
            "pick {:.4} skip {:.4} tree {}",
            h.price_after_pick,
            h.price_after_skip,
            serde_json::to_string(&h.tree)?
        );
    }

    let chains = SearchSpace {
        chains_only: true,
        ..space
    };
    let out = search_dependency_counterexample(&chains)?;
    println!("chains: examined {}, hits {}", out.examined, out.hits.len());
    Ok(())
}
