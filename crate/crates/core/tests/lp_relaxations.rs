mod common;

use common::{oracle_dp, random_laminar, random_production, rng};
use laminar_pricing::dp::{solve_full_dp, solve_production_dp};
use laminar_pricing::lp::{
    build_lp_exante, build_lp_hierarchy, build_lp_optimal, solve, solve_built, solve_decomposed, LpBackend,
};
use laminar_pricing::model::{BinSpec, DiscreteDistribution, LaminarInstance, ProductionInstance, DEFAULT_STATE_CAP};
use laminar_pricing::rounding::{mark_laminar, Marking};

const CAP: usize = DEFAULT_STATE_CAP;

#[test]
fn optimal_lp_matches_oracle_dp() {
    let mut r = rng(11);
    for i in 0..60 {
        let inst = random_laminar(&mut r, 6, 3, 3, 3);
        let dp = oracle_dp(&inst);
        let (table, _) = solve_full_dp(&inst, CAP).unwrap();
        assert!((table.initial_value() - dp).abs() < 1e-9, "instance {i}");
        let lp = solve(&build_lp_optimal(&inst, CAP).unwrap().model).unwrap();
        assert!((lp.objective - dp).abs() < 1e-6, "instance {i}: lp {} dp {dp}", lp.objective);
    }
}

#[test]
fn ex_ante_gap_witness() {
    let p = ProductionInstance::new(
        vec![
            DiscreteDistribution::deterministic(1.0),
            DiscreteDistribution::new(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap(),
        ],
        vec![0, 0],
        vec![0, 0],
        vec![vec![2]],
        1,
    )
    .unwrap();
    let built = build_lp_exante(&p, 1.0, CAP).unwrap();
    let lp = solve(&built.model).unwrap();
    assert!((lp.objective - 1.5).abs() < 1e-9, "{}", lp.objective);
    assert!((solve_production_dp(&p) - 1.0).abs() < 1e-12);
    let (dec, cert) = solve_decomposed(&built).unwrap();
    assert!((dec.objective - 1.5).abs() < 1e-9);
    assert!((cert.dual_bound - 1.5).abs() < 1e-7);
}

#[test]
fn decomposition_agrees_with_simplex_on_ex_ante() {
    let mut r = rng(12);
    for i in 0..40 {
        let p = random_production(&mut r, 7, 3, 3, 2, r_cap(i));
        let built = build_lp_exante(&p, 0.8, CAP).unwrap();
        let a = solve_built(&built, LpBackend::Simplex).unwrap();
        let b = solve_built(&built, LpBackend::Decomposition).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-6, "instance {i}: {} vs {}", a.objective, b.objective);
        let dp = solve_production_dp(&p);
        let full = build_lp_exante(&p, 1.0, CAP).unwrap();
        let unscaled = solve(&full.model).unwrap().objective;
        assert!(unscaled >= dp - 1e-6, "instance {i}: LP {unscaled} below DP {dp}");
    }
}

fn r_cap(i: usize) -> u32 {
    1 + (i % 4) as u32
}

#[test]
fn decomposition_agrees_with_simplex_on_hierarchy() {
    let mut r = rng(13);
    let mut checked = 0;
    for i in 0..80 {
        let inst = random_laminar(&mut r, 7, 3, 3, 3);
        let mk = mark_laminar(&inst, 0.6).unwrap();
        let built = build_lp_hierarchy(&inst, &mk, 0.9, CAP).unwrap();
        let a = solve_built(&built, LpBackend::Simplex).unwrap();
        let b = solve_built(&built, LpBackend::Decomposition).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-6, "instance {i}: {} vs {}", a.objective, b.objective);
        checked += !mk.large().is_empty() as usize;
    }
    assert!(checked > 10, "only {checked} instances had a large bin");
}

#[test]
fn hierarchy_relaxes_the_optimum() {
    let mut r = rng(14);
    for i in 0..60 {
        let inst = random_laminar(&mut r, 6, 3, 3, 3);
        let dp = oracle_dp(&inst);
        for delta in [0.3, 0.6, 0.95] {
            let mk = mark_laminar(&inst, delta).unwrap();
            let lp = solve(&build_lp_hierarchy(&inst, &mk, 1.0, CAP).unwrap().model).unwrap();
            assert!(lp.objective >= dp - 1e-6, "instance {i}, delta {delta}");
        }
        let all_large = Marking::all_large(&inst);
        let lp = solve(&build_lp_hierarchy(&inst, &all_large, 1.0, CAP).unwrap().model).unwrap();
        assert!(lp.objective >= dp - 1e-6);
        let all_small = Marking::all_small(&inst);
        let h = solve(&build_lp_hierarchy(&inst, &all_small, 1.0, CAP).unwrap().model).unwrap();
        assert!((h.objective - dp).abs() < 1e-6, "instance {i}");
    }
}

#[test]
fn hierarchy_on_nested_example() {
    // root cap 2 over two cap-1 bins, each holding one sure unit and one coin flip worth 0 or 2
    let det = DiscreteDistribution::deterministic(1.0);
    let coin = DiscreteDistribution::new(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap();
    let inst = LaminarInstance::new(
        vec![det.clone(), coin.clone(), det, coin],
        &BinSpec::new(
            2,
            vec![
                BinSpec::new(1, vec![BinSpec::leaf(0), BinSpec::leaf(1)]).node(),
                BinSpec::new(1, vec![BinSpec::leaf(2), BinSpec::leaf(3)]).node(),
            ],
        ),
    )
    .unwrap();
    let dp = oracle_dp(&inst);
    let mk = Marking::from_large(&inst, [inst.root()]).unwrap();
    let lp = solve(&build_lp_hierarchy(&inst, &mk, 1.0, CAP).unwrap().model).unwrap();
    // the root never binds: each child alone holds at most one pick
    assert!((lp.objective - dp).abs() < 1e-9);
    assert!((dp - 2.0).abs() < 1e-12);
    let opt = solve(&build_lp_optimal(&inst, CAP).unwrap().model).unwrap();
    assert!((opt.objective - dp).abs() < 1e-9);
}
