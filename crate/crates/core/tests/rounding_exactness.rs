mod common;

use common::{oracle_dp, random_laminar, random_production, rng};
use laminar_pricing::dp::solve_full_dp;
use laminar_pricing::eval::{evaluate_block, evaluate_exact};
use laminar_pricing::lp::{build_lp_exante, build_lp_hierarchy, build_lp_optimal, solve, BuiltLp, LpSolution};
use laminar_pricing::model::DEFAULT_STATE_CAP;
use laminar_pricing::rounding::{extract_pricing, mark_laminar, PricingPolicy};

const CAP: usize = DEFAULT_STATE_CAP;

/// Largest gap between the LP's state probabilities and the extracted policy's exact trace,
/// each block evaluated on its own.
fn trace_gap(built: &BuiltLp, sol: &LpSolution) -> (f64, f64) {
    let policies = extract_pricing(sol, built).unwrap();
    let mut worst: f64 = 0.0;
    let mut welfare = 0.0;
    for (layout, bp) in built.blocks.iter().zip(&policies) {
        let (w, trace) = evaluate_block(bp, &built.dists).unwrap();
        welfare += w;
        for (pos, vars) in layout.y.iter().enumerate() {
            for (s, &v) in vars {
                let got = trace[pos].get(s).copied().unwrap_or(0.0);
                worst = worst.max((got - sol.values[v]).abs());
            }
        }
    }
    (worst, welfare)
}

#[test]
fn optimal_lp_policy_reproduces_the_solution() {
    let mut r = rng(21);
    for i in 0..80 {
        let inst = random_laminar(&mut r, 6, 3, 3, 3);
        let built = build_lp_optimal(&inst, CAP).unwrap();
        let sol = solve(&built.model).unwrap();
        let (gap, welfare) = trace_gap(&built, &sol);
        assert!(gap <= 1e-7, "instance {i}: trace gap {gap}");
        assert!((welfare - sol.objective).abs() <= 1e-6, "instance {i}");
        let policy = PricingPolicy::new(inst.num_elements(), extract_pricing(&sol, &built).unwrap(), vec![]).unwrap();
        let ev = evaluate_exact(&policy, inst.elements(), CAP).unwrap();
        assert!((ev.welfare - oracle_dp(&inst)).abs() <= 1e-6, "instance {i}");
    }
}

#[test]
fn relaxed_lp_blocks_are_reproduced_too() {
    let mut r = rng(22);
    for i in 0..40 {
        let p = random_production(&mut r, 7, 2, 3, 2, 2);
        let built = build_lp_exante(&p, 0.7, CAP).unwrap();
        let sol = solve(&built.model).unwrap();
        let (gap, welfare) = trace_gap(&built, &sol);
        assert!(gap <= 1e-7, "production {i}: {gap}");
        assert!((welfare - sol.objective).abs() <= 1e-6);

        let inst = random_laminar(&mut r, 6, 3, 3, 3);
        let mk = mark_laminar(&inst, 0.5).unwrap();
        let built = build_lp_hierarchy(&inst, &mk, 0.8, CAP).unwrap();
        let sol = solve(&built.model).unwrap();
        let (gap, welfare) = trace_gap(&built, &sol);
        assert!(gap <= 1e-7, "laminar {i}: {gap}");
        assert!((welfare - sol.objective).abs() <= 1e-6);
    }
}

#[test]
fn dp_policy_evaluates_to_dp_value() {
    let mut r = rng(23);
    for _ in 0..40 {
        let inst = random_laminar(&mut r, 6, 3, 3, 3);
        let (table, policy) = solve_full_dp(&inst, CAP).unwrap();
        let ev = evaluate_exact(&policy, inst.elements(), CAP).unwrap();
        assert!((ev.welfare - table.initial_value()).abs() < 1e-9);
    }
}

#[test]
fn all_infinite_policy_never_moves() {
    let mut r = rng(24);
    let inst = random_laminar(&mut r, 5, 3, 2, 3);
    let built = build_lp_optimal(&inst, CAP).unwrap();
    let mut sol = solve(&built.model).unwrap();
    sol.values.iter_mut().for_each(|v| *v = 0.0);
    let policy = PricingPolicy::new(inst.num_elements(), extract_pricing(&sol, &built).unwrap(), vec![]).unwrap();
    let ev = evaluate_exact(&policy, inst.elements(), CAP).unwrap();
    assert_eq!(ev.welfare, 0.0);
    for layer in &ev.trace[0] {
        assert_eq!(layer.len(), 1);
        assert_eq!(layer.values().next(), Some(&1.0));
    }
}
