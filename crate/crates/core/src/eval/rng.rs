//! Random streams for Monte Carlo runs.
//!
//! Every trial owns a ChaCha8 stream: key from `seed_from_u64(seed)`, stream id = trial index.
//! Per trial and per element, in arrival order, two uniforms in `[0, 1)` are drawn: the first
//! picks the value by inverse CDF, the second is the tie-break coin. Results therefore depend
//! only on `(seed, trial)`, never on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::DiscreteDistribution;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One realization: the value of each element and the coin it would be flipped at a tie.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub values: Vec<f64>,
    pub coins: Vec<f64>,
}

pub fn draw(dists: &[DiscreteDistribution], seed: u64, trial: u64) -> Draw {
    let mut rng = trial_rng(seed, trial);
    let mut values = Vec::with_capacity(dists.len());
    let mut coins = Vec::with_capacity(dists.len());
    for d in dists {
        let u: f64 = rng.random();
        let c: f64 = rng.random();
        values.push(d.atoms()[d.sample_index(u)].value);
        coins.push(c);
    }
    Draw { values, coins }
}
