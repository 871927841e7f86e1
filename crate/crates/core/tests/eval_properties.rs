mod common;

use common::{oracle_dp, random_dist, random_laminar, random_production, rng, sum_of_positive_means};
use laminar_pricing::dp::{concavity_check, solve_full_dp, solve_subproblem_dp};
use laminar_pricing::eval::{
    check_negative_cylinder, conditional_prices, evaluate_exact, prophet_exact, search_dependency_counterexample,
    simulate, SearchSpace,
};
use laminar_pricing::lp::{build_lp_hierarchy, solve};
use laminar_pricing::model::{BinSpec, Block, DiscreteDistribution, LaminarInstance, ProductionInstance, DEFAULT_STATE_CAP};
use laminar_pricing::ptas::{ptas_laminar, PtasConfig};
use laminar_pricing::rounding::{mark_laminar, Guard, PricingPolicy};
use proptest::prelude::*;

const CAP: usize = DEFAULT_STATE_CAP;

fn coin_then_sure() -> LaminarInstance {
    LaminarInstance::new(
        vec![
            DiscreteDistribution::uniform(&[0.0, 2.0]).unwrap(),
            DiscreteDistribution::deterministic(1.0),
        ],
        &BinSpec::new(1, vec![BinSpec::leaf(0), BinSpec::leaf(1)]),
    )
    .unwrap()
}

#[test]
fn optimal_policy_simulates_to_its_value() {
    let inst = coin_then_sure();
    let (table, policy) = solve_full_dp(&inst, CAP).unwrap();
    assert_eq!(table.initial_value(), 1.5);
    let r = simulate(&policy, &inst, 1_000_000, 2024).unwrap();
    assert!((r.mean_welfare - 1.5).abs() <= 3.0 * r.stderr, "{} ± {}", r.mean_welfare, r.stderr);
    assert_eq!(r.total_violations(), 0);
}

#[test]
fn accept_all_on_sure_values_has_no_noise() {
    let d: Vec<DiscreteDistribution> = [1.0, 2.5, 4.0].iter().map(|&v| DiscreteDistribution::deterministic(v)).collect();
    let inst = LaminarInstance::new(d, &BinSpec::new(3, (0..3).map(BinSpec::leaf).collect())).unwrap();
    let (_, policy) = solve_full_dp(&inst, CAP).unwrap();
    let r = simulate(&policy, &inst, 500, 1).unwrap();
    assert_eq!(r.mean_welfare, 7.5);
    assert_eq!(r.stderr, 0.0);
    assert_eq!(r.acceptance, vec![1.0; 3]);
}

#[test]
fn full_guard_ignores_everything() {
    let inst = coin_then_sure();
    let (_, dp) = solve_full_dp(&inst, CAP).unwrap();
    let closed = PricingPolicy::new(
        2,
        dp.blocks().to_vec(),
        vec![Guard {
            bin: inst.root(),
            capacity: 0,
            members: vec![0, 1],
        }],
    )
    .unwrap();
    let r = simulate(&closed, &inst, 1000, 5).unwrap();
    assert_eq!(r.mean_welfare, 0.0);
    assert_eq!(r.ignored_fraction, 1.0);
    assert_eq!(r.guard_hit_rate, 1.0);
    let ev = evaluate_exact(&closed, inst.elements(), CAP).unwrap();
    assert_eq!(ev.welfare, 0.0);
    assert_eq!(ev.ignored, vec![1.0, 1.0]);
}

#[test]
fn simulation_is_thread_count_invariant() {
    let mut r = rng(31);
    let inst = random_laminar(&mut r, 6, 3, 3, 3);
    let out = ptas_laminar(&inst, &PtasConfig::new(0.3).with_delta(0.5)).unwrap();
    let run = |k: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .unwrap()
            .install(|| simulate(&out.policy, &inst, 30_000, 77).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(3));
    assert_eq!(a.to_csv().unwrap(), run(8).to_csv().unwrap());
}

#[test]
fn benchmark_ordering() {
    let mut r = rng(32);
    for i in 0..30 {
        let inst = random_laminar(&mut r, 6, 3, 3, 3);
        let dp = oracle_dp(&inst);
        let cfg = PtasConfig::new(0.2).with_delta(0.5);
        let out = ptas_laminar(&inst, &cfg).unwrap();
        let sim = simulate(&out.policy, &inst, 20_000, i).unwrap();
        assert!(sim.mean_welfare <= dp + 3.0 * sim.stderr + 1e-9, "instance {i}");
        let mk = mark_laminar(&inst, 0.5).unwrap();
        let lp4 = solve(&build_lp_hierarchy(&inst, &mk, 1.0, CAP).unwrap().model).unwrap().objective;
        assert!(lp4 >= dp - 1e-6);
        let prophet = prophet_exact(&inst, 1 << 16).unwrap();
        assert!(prophet >= dp - 1e-9, "instance {i}");
        assert!(prophet <= 2.0 * dp + 1e-9, "instance {i}: prophet {prophet} dp {dp}");
        assert!(prophet <= sum_of_positive_means(&inst) + 1e-9);
    }
}

#[test]
fn prophet_gap_on_single_item() {
    let inst = LaminarInstance::new(
        vec![
            DiscreteDistribution::deterministic(1.0),
            DiscreteDistribution::new(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap(),
        ],
        &BinSpec::new(1, vec![BinSpec::leaf(0), BinSpec::leaf(1)]),
    )
    .unwrap();
    assert_eq!(oracle_dp(&inst), 1.0);
    assert_eq!(prophet_exact(&inst, 16).unwrap(), 1.5);
}

/// A later buyer that is served only when an earlier one was: the cylinder inequality fails
/// for that pair even though every price rises with past sales.
#[test]
fn cylinder_inequality_fails_on_a_binding_chain() {
    let coin10 = DiscreteDistribution::uniform(&[0.0, 10.0]).unwrap();
    let p = ProductionInstance::new(
        vec![coin10.clone(), coin10, DiscreteDistribution::deterministic(5.0), DiscreteDistribution::uniform(&[0.0, 3.0]).unwrap()],
        vec![0; 4],
        vec![0; 4],
        vec![vec![2]],
        4,
    )
    .unwrap();
    let block = Block::for_type(&p, 0);
    let rep = check_negative_cylinder(&block, &p.elements, 0.0, 1e-9).unwrap();
    // hand computation: both coins land high w.p. 1/4, which alone blocks the last two buyers
    let want = [0.5, 0.5, 0.75, 0.25];
    for (got, want) in rep.marginals.iter().zip(want) {
        assert!((got - want).abs() < 1e-12, "{:?}", rep.marginals);
    }
    assert!(!rep.holds);
    assert_eq!(rep.worst_subset, vec![2, 3]);
    assert!((rep.gap - (0.25 - 0.75 * 0.25)).abs() < 1e-12);
    let table = solve_subproblem_dp(&block, &p.elements, 0.0, CAP).unwrap();
    assert!(concavity_check(&table).unwrap().holds);
}

#[test]
fn two_element_trees_never_hit() {
    let mut r = rng(33);
    for _ in 0..20 {
        let space = SearchSpace {
            dists: (0..2).map(|_| random_dist(&mut r, 3, 0, 6)).collect(),
            max_bins: 3,
            max_cap: 3,
            chains_only: false,
        };
        assert!(search_dependency_counterexample(&space).unwrap().hits.is_empty());
    }
}

#[test]
fn recovered_structure_prices() {
    let out = search_dependency_counterexample(&SearchSpace::five_elements()).unwrap();
    let hit = out.canonical.expect("search finds the (1, 1.25) structure");
    let inst = LaminarInstance::new(SearchSpace::five_elements().dists, &hit.tree).unwrap();
    assert_eq!(conditional_prices(&inst).unwrap(), Some((1.0, 1.25)));
    let chains = SearchSpace {
        chains_only: true,
        ..SearchSpace::five_elements()
    };
    assert!(search_dependency_counterexample(&chains).unwrap().hits.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_prices_rise_with_sales(seed in any::<u64>(), n in 1usize..11, shift_ix in 0usize..3) {
        let mut r = rng(seed);
        let p = random_production(&mut r, n, 1, 3, 2, n as u32);
        let block = Block::for_type(&p, 0);
        let shift = [-1.0, 0.0, 0.7][shift_ix];
        let table = solve_subproblem_dp(&block, &p.elements, shift, CAP).unwrap();
        let rep = concavity_check(&table).unwrap();
        prop_assert!(rep.holds, "{:?}", rep.worst);
    }

    #[test]
    fn unit_capacity_chains_are_negatively_dependent(seed in any::<u64>(), n in 1usize..9, shift_ix in 0usize..3) {
        let mut r = rng(seed);
        let dists: Vec<DiscreteDistribution> = (0..n).map(|_| random_dist(&mut r, 3, 0, 8)).collect();
        let p = ProductionInstance::new(dists, vec![0; n], vec![0; n], vec![vec![1]], n as u32).unwrap();
        let shift = [-1.0, 0.0, 0.7][shift_ix];
        let rep = check_negative_cylinder(&Block::for_type(&p, 0), &p.elements, shift, 1e-9).unwrap();
        prop_assert!(rep.holds, "gap {} on {:?}", rep.gap, rep.worst_subset);
    }

    #[test]
    fn exact_evaluation_of_dp_policy_matches_dp(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_laminar(&mut r, 6, 3, 3, 3);
        let (table, policy) = solve_full_dp(&inst, CAP).unwrap();
        let ev = evaluate_exact(&policy, inst.elements(), CAP).unwrap();
        prop_assert!((ev.welfare - table.initial_value()).abs() < 1e-9);
        for layer in &ev.trace[0] {
            let mass: f64 = layer.values().sum();
            prop_assert!((mass - 1.0).abs() < 1e-9);
        }
    }
}
