use rayon::prelude::*;
use serde::Serialize;

use super::rng::draw;
use super::stats::Moments;
use crate::error::{Error, Result};
use crate::model::{BinId, LaminarInstance};
use crate::rounding::{PricingPolicy, Quote};

/// Trials are simulated in fixed chunks and merged in chunk order, so reports do not depend on
/// the number of worker threads.
pub const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinViolations {
    pub bin: BinId,
    pub capacity: u32,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub mean_welfare: f64,
    pub stderr: f64,
    /// Arrivals quoted +∞ by a full guard, as a fraction of all arrivals.
    pub ignored_fraction: f64,
    pub ignored_stderr: f64,
    /// Fraction of trials in which at least one arrival was ignored.
    pub guard_hit_rate: f64,
    pub guard_hit_stderr: f64,
    /// Trials in which a pick pushed the bin past its capacity; always zero for a sound policy.
    pub violations: Vec<BinViolations>,
    pub acceptance: Vec<f64>,
}

impl SimulationReport {
    pub fn total_violations(&self) -> u64 {
        self.violations.iter().map(|v| v.count).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per metric: `metric,value,stderr,trials,seed`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["metric", "value", "stderr", "trials", "seed"])?;
        let trials = self.trials.to_string();
        let seed = self.seed.to_string();
        let mut row = |metric: String, value: f64, stderr: f64| {
            w.write_record([metric, value.to_string(), stderr.to_string(), trials.clone(), seed.clone()])
        };
        row("mean_welfare".into(), self.mean_welfare, self.stderr)?;
        row("ignored_fraction".into(), self.ignored_fraction, self.ignored_stderr)?;
        row("guard_hit_rate".into(), self.guard_hit_rate, self.guard_hit_stderr)?;
        row("violations".into(), self.total_violations() as f64, 0.0)?;
        for v in &self.violations {
            row(format!("violations.bin{}", v.bin), v.count as f64, 0.0)?;
        }
        let n = self.trials as f64;
        for (e, &p) in self.acceptance.iter().enumerate() {
            let se = if self.trials > 1 { (p * (1.0 - p) / (n - 1.0)).max(0.0).sqrt() } else { 0.0 };
            row(format!("acceptance.e{e}"), p, se)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

#[derive(Debug, Clone, Default)]
struct Acc {
    welfare: Moments,
    ignored: Moments,
    hit: Moments,
    violations: Vec<u64>,
    accepted: Vec<u64>,
}

impl Acc {
    fn new(bins: usize, n: usize) -> Self {
        Self {
            violations: vec![0; bins],
            accepted: vec![0; n],
            ..Default::default()
        }
    }

    fn merge(&mut self, o: &Acc) {
        self.welfare.merge(&o.welfare);
        self.ignored.merge(&o.ignored);
        self.hit.merge(&o.hit);
        self.violations.iter_mut().zip(&o.violations).for_each(|(a, b)| *a += b);
        self.accepted.iter_mut().zip(&o.accepted).for_each(|(a, b)| *a += b);
    }
}

/// Runs the policy on i.i.d. draws. Bin loads are tracked against the instance itself, not the
/// policy's own bookkeeping, so an unsound policy shows up as violations.
pub fn simulate(policy: &PricingPolicy, inst: &LaminarInstance, trials: u64, seed: u64) -> Result<SimulationReport> {
    if policy.num_elements() != inst.num_elements() {
        return Err(Error::PolicyMismatch(format!(
            "policy covers {} elements, instance has {}",
            policy.num_elements(),
            inst.num_elements()
        )));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let n = inst.num_elements();
    let paths: Vec<Vec<BinId>> = (0..n).map(|e| inst.element_path(e)).collect();
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Acc> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Acc::new(inst.bins().len(), n);
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                run_trial(policy, inst, &paths, seed, trial, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = Acc::new(inst.bins().len(), n);
    for p in &parts {
        total.merge(p);
    }
    let tf = trials as f64;
    Ok(SimulationReport {
        trials,
        seed,
        mean_welfare: total.welfare.mean,
        stderr: total.welfare.stderr(),
        ignored_fraction: total.ignored.mean,
        ignored_stderr: total.ignored.stderr(),
        guard_hit_rate: total.hit.mean,
        guard_hit_stderr: total.hit.stderr(),
        violations: inst
            .bins()
            .iter()
            .map(|b| BinViolations {
                bin: b.id,
                capacity: b.capacity,
                count: total.violations[b.id.0],
            })
            .collect(),
        acceptance: total.accepted.iter().map(|&a| a as f64 / tf).collect(),
    })
}

fn run_trial(
    policy: &PricingPolicy,
    inst: &LaminarInstance,
    paths: &[Vec<BinId>],
    seed: u64,
    trial: u64,
    acc: &mut Acc,
) -> Result<()> {
    let n = inst.num_elements();
    let d = draw(inst.elements(), seed, trial);
    let mut st = policy.start();
    let mut load = vec![0u32; inst.bins().len()];
    let mut over = vec![false; inst.bins().len()];
    let mut welfare = 0.0;
    let mut ignored = 0usize;
    for e in 0..n {
        let accepted = match policy.quote(&st, e)? {
            Quote::Ignored => {
                ignored += 1;
                false
            }
            Quote::Price(rule) => rule.accepts(d.values[e], d.coins[e]),
        };
        if accepted {
            welfare += d.values[e];
            acc.accepted[e] += 1;
            for b in &paths[e] {
                load[b.0] += 1;
                if load[b.0] > inst.bin(*b).capacity {
                    over[b.0] = true;
                }
            }
        }
        policy.commit(&mut st, e, accepted);
    }
    for (b, &o) in over.iter().enumerate() {
        acc.violations[b] += o as u64;
    }
    acc.welfare.push(welfare);
    acc.ignored.push(if n == 0 { 0.0 } else { ignored as f64 / n as f64 });
    acc.hit.push((ignored > 0) as u8 as f64);
    Ok(())
}
