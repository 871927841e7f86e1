use rayon::prelude::*;
use serde::Serialize;

use super::rng::draw;
use super::stats::Moments;
use super::simulate::CHUNK;
use crate::error::{Error, Result};
use crate::model::LaminarInstance;

/// Best offline pick for known values: greedy by value, which is exact on a laminar matroid.
pub fn offline_optimum(inst: &LaminarInstance, values: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).filter(|&e| values[e] > 0.0).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut room: Vec<u32> = inst.bins().iter().map(|b| b.capacity).collect();
    let mut total = 0.0;
    for e in order {
        let path = inst.element_path(e);
        if path.iter().all(|b| room[b.0] > 0) {
            for b in &path {
                room[b.0] -= 1;
            }
            total += values[e];
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProphetEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Monte Carlo prophet value. Uses the same realizations as a simulation with the same seed.
pub fn prophet_value(inst: &LaminarInstance, trials: u64, seed: u64) -> ProphetEstimate {
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::default();
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                m.push(offline_optimum(inst, &draw(inst.elements(), seed, t).values));
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    parts.iter().for_each(|p| total.merge(p));
    ProphetEstimate {
        mean: total.mean,
        stderr: total.stderr(),
        trials,
    }
}

/// Prophet value by enumerating every joint realization; fails past `limit` realizations.
pub fn prophet_exact(inst: &LaminarInstance, limit: usize) -> Result<f64> {
    let dists = inst.elements();
    let count = dists
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(d.len()).filter(|&c| c <= limit));
    if count.is_none() {
        return Err(Error::Sizing {
            scope: "prophet realizations".into(),
            limit,
        });
    }
    let n = dists.len();
    let mut idx = vec![0usize; n];
    let mut values = vec![0.0; n];
    let mut total = 0.0;
    loop {
        let mut pr = 1.0;
        for e in 0..n {
            let a = dists[e].atoms()[idx[e]];
            values[e] = a.value;
            pr *= a.prob;
        }
        total += pr * offline_optimum(inst, &values);
        let mut k = 0;
        loop {
            if k == n {
                return Ok(total);
            }
            idx[k] += 1;
            if idx[k] < dists[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
