mod common;

use common::rng;
use laminar_pricing::error::Error;
use laminar_pricing::lp::{solve_with, LpModel, LpStatus, PivotRule, Relation, SimplexOptions, DEFAULT_PIVOT_CAP};
use rand::Rng;

/// Dense `max c·x` over `x ≥ 0` with rows `a_i·x (rel) b_i`.
struct Dense {
    c: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl Dense {
    fn random(r: &mut impl Rng, m: usize, n: usize) -> Self {
        let c = (0..n).map(|_| r.random_range(-3..=6) as f64).collect();
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = (0..m)
            .map(|_| {
                let a = (0..n).map(|_| r.random_range(-2..=5) as f64).collect();
                let rel = match r.random_range(0..6) {
                    0 => Relation::Ge,
                    1 => Relation::Eq,
                    _ => Relation::Le,
                };
                (a, rel, r.random_range(0..=12) as f64)
            })
            .collect();
        // keeps the feasible region bounded
        rows.push((vec![1.0; n], Relation::Le, 20.0));
        Self { c, rows }
    }

    fn model(&self) -> LpModel {
        let mut m = LpModel::new();
        let xs: Vec<usize> = (0..self.c.len()).map(|j| m.add_nonneg(&format!("x{j}")).unwrap()).collect();
        for (j, &c) in self.c.iter().enumerate() {
            m.set_objective(xs[j], c);
        }
        for (i, (a, rel, b)) in self.rows.iter().enumerate() {
            let terms = a.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, &v)| (xs[j], v)).collect();
            m.add_constraint(&format!("r{i}"), terms, *rel, *b);
        }
        m
    }

    fn feasible(&self, x: &[f64]) -> bool {
        const TOL: f64 = 1e-7;
        x.iter().all(|&v| v >= -TOL)
            && self.rows.iter().all(|(a, rel, b)| {
                let lhs: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                match rel {
                    Relation::Le => lhs <= b + TOL,
                    Relation::Ge => lhs >= b - TOL,
                    Relation::Eq => (lhs - b).abs() <= TOL,
                }
            })
    }

    /// Best objective over all basic feasible points: every choice of `n` tight constraints
    /// among the rows and the sign bounds, solved by Gaussian elimination.
    fn vertex_optimum(&self) -> Option<f64> {
        let n = self.c.len();
        let mut hyper: Vec<(Vec<f64>, f64)> = self.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            hyper.push((e, 0.0));
        }
        let mut best: Option<f64> = None;
        for pick in subsets(hyper.len(), n) {
            let sys: Vec<&(Vec<f64>, f64)> = pick.iter().map(|&i| &hyper[i]).collect();
            let Some(x) = gauss(&sys, n) else { continue };
            if self.feasible(&x) {
                let z: f64 = self.c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(z, |b: f64| b.max(z)));
            }
        }
        best
    }
}

fn subsets(len: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, len: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..len {
            cur.push(i);
            go(i + 1, len, k, cur, out);
            cur.pop();
        }
    }
    go(0, len, k, &mut cur, &mut out);
    out
}

fn gauss(sys: &[&(Vec<f64>, f64)], n: usize) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = sys.iter().map(|(row, b)| row.iter().copied().chain([*b]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                for k in col..=n {
                    a[i][k] -= f * a[col][k];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

fn opts(rule: PivotRule) -> SimplexOptions {
    SimplexOptions {
        pivot_cap: DEFAULT_PIVOT_CAP,
        rule,
    }
}

#[test]
fn small_lps_match_vertex_enumeration() {
    let mut r = rng(61);
    let (mut optimal, mut infeasible) = (0, 0);
    for i in 0..300 {
        let m = r.random_range(1..=5);
        let n = r.random_range(1..=5);
        let lp = Dense::random(&mut r, m, n);
        let want = lp.vertex_optimum();
        for rule in [PivotRule::Bland, PivotRule::DantzigThenBland] {
            match (solve_with(&lp.model(), &opts(rule)), want) {
                (Ok(sol), Some(z)) => {
                    assert!((sol.objective - z).abs() < 1e-7, "lp {i} {rule:?}: {} vs {z}", sol.objective);
                    assert!(lp.feasible(&sol.values), "lp {i} {rule:?}");
                }
                (Err(Error::Lp(LpStatus::Infeasible)), None) => {}
                (got, want) => panic!("lp {i} {rule:?}: solver {got:?}, vertices {want:?}"),
            }
        }
        if want.is_some() {
            optimal += 1;
        } else {
            infeasible += 1;
        }
    }
    assert!(optimal > 100 && infeasible > 10, "{optimal} optimal, {infeasible} infeasible");
}

#[test]
fn pivot_rules_agree_on_larger_lps() {
    let mut r = rng(62);
    let mut solved = 0;
    for i in 0..60 {
        let lp = Dense::random(&mut r, 20, 20);
        let a = solve_with(&lp.model(), &opts(PivotRule::Bland));
        let b = solve_with(&lp.model(), &opts(PivotRule::DantzigThenBland));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                assert!((a.objective - b.objective).abs() < 1e-7, "lp {i}: {} vs {}", a.objective, b.objective);
                assert!(lp.feasible(&a.values) && lp.feasible(&b.values), "lp {i}");
                solved += 1;
            }
            (Err(Error::Lp(LpStatus::Infeasible)), Err(Error::Lp(LpStatus::Infeasible))) => {}
            (a, b) => panic!("lp {i}: {a:?} vs {b:?}"),
        }
    }
    assert!(solved > 0);
}
