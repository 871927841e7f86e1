//! Two-phase primal simplex on a dense tableau.

use super::model::{LpModel, LpSolution, LpStatus, Relation};
use crate::error::{Error, Result};

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
pub const DEFAULT_PIVOT_CAP: usize = 1_000_000;
/// Constraint residual accepted on the returned assignment.
pub const RESIDUAL_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Lowest-index entering column and lowest-index leaving basic variable.
    Bland,
    /// Largest reduced cost, switching to Bland's rule during runs of degenerate pivots.
    DantzigThenBland,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplexOptions {
    pub pivot_cap: usize,
    pub rule: PivotRule,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_cap: DEFAULT_PIVOT_CAP,
            rule: PivotRule::DantzigThenBland,
        }
    }
}

pub fn solve(model: &LpModel) -> Result<LpSolution> {
    solve_with(model, &SimplexOptions::default())
}

/// How a model variable is expressed through non-negative tableau columns.
struct ColMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

struct Tableau {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    live: Vec<bool>,
    /// reduced costs: phase 1 and phase 2
    d: [Vec<f64>; 2],
    z: [f64; 2],
    pivots: usize,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let piv = self.a[r * n + q];
        {
            let row = &mut self.a[r * n..(r + 1) * n];
            for x in row.iter_mut() {
                *x /= piv;
            }
            row[q] = 1.0;
        }
        self.b[r] /= piv;
        let nz: Vec<usize> = (0..n).filter(|&j| self.a[r * n + j] != 0.0).collect();
        let (pr, br) = (self.a[r * n..(r + 1) * n].to_vec(), self.b[r]);
        for i in 0..self.m {
            if i == r || !self.live[i] {
                continue;
            }
            let f = self.a[i * n + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * n..(i + 1) * n];
            for &j in &nz {
                let v = row[j] - f * pr[j];
                row[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
            }
            row[q] = 0.0;
            let v = self.b[i] - f * br;
            self.b[i] = if v.abs() < DROP_TOL { 0.0 } else { v };
        }
        for k in 0..2 {
            let f = self.d[k][q];
            if f == 0.0 {
                continue;
            }
            for &j in &nz {
                self.d[k][j] -= f * pr[j];
            }
            self.d[k][q] = 0.0;
            self.z[k] += f * br;
        }
        self.basis[r] = q;
        self.pivots += 1;
    }

    fn entering(&self, phase: usize, allowed: usize, bland: bool) -> Option<usize> {
        let d = &self.d[phase];
        if bland {
            (0..allowed).find(|&j| d[j] > OPTIMALITY_TOL)
        } else {
            let mut best: Option<usize> = None;
            for j in 0..allowed {
                if d[j] > OPTIMALITY_TOL && best.is_none_or(|b| d[j] > d[b]) {
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            if !self.live[i] {
                continue;
            }
            let a = self.a[i * self.n + q];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.b[i].max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br - 1e-12 * (1.0 + br.abs())
                        || (ratio <= br + 1e-12 * (1.0 + br.abs()) && self.basis[i] < self.basis[bi])
                    {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, phase: usize, allowed: usize, opts: &SimplexOptions) -> Result<()> {
        let mut degenerate_run = 0usize;
        loop {
            if self.pivots >= opts.pivot_cap {
                return Err(Error::IterationLimit(opts.pivot_cap));
            }
            let bland = match opts.rule {
                PivotRule::Bland => true,
                PivotRule::DantzigThenBland => degenerate_run > 50,
            };
            let Some(q) = self.entering(phase, allowed, bland) else {
                return Ok(());
            };
            let Some(r) = self.leaving(q) else {
                return Err(Error::Lp(LpStatus::Unbounded));
            };
            if self.b[r].abs() <= FEASIBILITY_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, q);
        }
    }
}

pub fn solve_with(model: &LpModel, opts: &SimplexOptions) -> Result<LpSolution> {
    // Column maps for the model variables.
    let mut maps = Vec::with_capacity(model.num_vars());
    let mut nx = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for v in model.variables() {
        let map = if v.lower.is_finite() && v.upper.is_finite() && v.lower == v.upper {
            ColMap {
                offset: v.lower,
                cols: vec![],
            }
        } else if v.lower.is_finite() {
            if v.upper.is_finite() {
                bound_rows.push((nx, v.upper - v.lower));
            }
            nx += 1;
            ColMap {
                offset: v.lower,
                cols: vec![(nx - 1, 1.0)],
            }
        } else if v.upper.is_finite() {
            nx += 1;
            ColMap {
                offset: v.upper,
                cols: vec![(nx - 1, -1.0)],
            }
        } else {
            nx += 2;
            ColMap {
                offset: 0.0,
                cols: vec![(nx - 2, 1.0), (nx - 1, -1.0)],
            }
        };
        maps.push(map);
    }

    // Rows over structural columns with non-negative right-hand sides.
    let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = Vec::new();
    for c in model.constraints() {
        let mut terms = Vec::new();
        let mut rhs = c.rhs;
        for &(j, a) in &c.terms {
            rhs -= a * maps[j].offset;
            for &(k, s) in &maps[j].cols {
                terms.push((k, a * s));
            }
        }
        rows.push((terms, c.relation, rhs));
    }
    for &(k, u) in &bound_rows {
        rows.push((vec![(k, 1.0)], Relation::Le, u));
    }
    for row in rows.iter_mut() {
        if row.2 < 0.0 {
            for t in row.0.iter_mut() {
                t.1 = -t.1;
            }
            row.2 = -row.2;
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let ns = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let na = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let n = nx + ns + na;
    let mut t = Tableau {
        m,
        n,
        a: vec![0.0; m * n],
        b: vec![0.0; m],
        basis: vec![0; m],
        live: vec![true; m],
        d: [vec![0.0; n], vec![0.0; n]],
        z: [0.0; 2],
        pivots: 0,
    };
    let (mut si, mut ai) = (nx, nx + ns);
    for (i, (terms, rel, rhs)) in rows.iter().enumerate() {
        for &(k, a) in terms {
            t.a[i * n + k] += a;
        }
        t.b[i] = *rhs;
        match rel {
            Relation::Le => {
                t.a[i * n + si] = 1.0;
                t.basis[i] = si;
                si += 1;
            }
            Relation::Ge => {
                t.a[i * n + si] = -1.0;
                si += 1;
                t.a[i * n + ai] = 1.0;
                t.basis[i] = ai;
                ai += 1;
            }
            Relation::Eq => {
                t.a[i * n + ai] = 1.0;
                t.basis[i] = ai;
                ai += 1;
            }
        }
    }

    // Phase-2 costs on structural columns.
    for (j, &c) in model.objective().iter().enumerate() {
        for &(k, s) in &maps[j].cols {
            t.d[1][k] += c * s;
        }
    }
    // Phase-1: maximize −Σ artificials, priced out against the initial basis.
    for i in 0..m {
        if t.basis[i] >= nx + ns {
            for j in 0..nx + ns {
                t.d[0][j] += t.a[i * n + j];
            }
            t.z[0] -= t.b[i];
        }
    }

    if na > 0 {
        t.run(0, nx + ns, opts)?;
        let scale = t.b.iter().fold(1.0f64, |acc, &x| acc.max(x.abs()));
        let infeasibility: f64 = (0..m)
            .filter(|&i| t.basis[i] >= nx + ns)
            .map(|i| t.b[i].abs())
            .sum();
        if infeasibility > FEASIBILITY_TOL * scale {
            return Err(Error::Lp(LpStatus::Infeasible));
        }
        for i in 0..m {
            if t.basis[i] < nx + ns {
                continue;
            }
            let row = t.row(i);
            match (0..nx + ns).find(|&j| row[j].abs() > PIVOT_TOL) {
                Some(q) => t.pivot(i, q),
                None => t.live[i] = false,
            }
        }
    }
    t.run(1, nx + ns, opts)?;

    let mut xs = vec![0.0; nx + ns + na];
    for i in 0..m {
        if t.live[i] {
            xs[t.basis[i]] = t.b[i];
        }
    }
    let values: Vec<f64> = maps
        .iter()
        .map(|mp| mp.offset + mp.cols.iter().map(|&(k, s)| s * xs[k]).sum::<f64>())
        .collect();
    let residual = model.max_violation(&values);
    if residual > RESIDUAL_TOL {
        return Err(Error::CorruptSolution(format!(
            "simplex basis leaves a residual of {residual:e}"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: model.objective_value(&values),
        values,
        pivots: t.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bound() {
        let mut m = LpModel::new();
        let x = m.add_nonneg("x").unwrap();
        m.set_objective(x, 1.0);
        m.add_constraint("c", vec![(x, 1.0)], Relation::Le, 3.0);
        let s = solve(&m).unwrap();
        assert_eq!(s.objective, 3.0);
    }

    #[test]
    fn degenerate_split() {
        let mut m = LpModel::new();
        let x = m.add_nonneg("x").unwrap();
        let y = m.add_nonneg("y").unwrap();
        m.set_objective(x, 1.0);
        m.set_objective(y, 1.0);
        m.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let opts = SimplexOptions {
            pivot_cap: 10,
            rule: PivotRule::Bland,
        };
        let s = solve_with(&m, &opts).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        // Bland's rule enters x first
        assert_eq!(s.values, vec![1.0, 0.0]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = LpModel::new();
        let x = m.add_nonneg("x").unwrap();
        m.add_constraint("a", vec![(x, 1.0)], Relation::Ge, 2.0);
        m.add_constraint("b", vec![(x, 1.0)], Relation::Le, 1.0);
        assert!(matches!(solve(&m), Err(Error::Lp(LpStatus::Infeasible))));

        let mut m = LpModel::new();
        let x = m.add_nonneg("x").unwrap();
        m.set_objective(x, 1.0);
        m.add_constraint("a", vec![(x, 1.0)], Relation::Ge, 2.0);
        assert!(matches!(solve(&m), Err(Error::Lp(LpStatus::Unbounded))));
    }

    #[test]
    fn general_bounds_and_equalities() {
        // max 2x - y, x in [-1, 4], y free, x + y = 3, y >= -2
        let mut m = LpModel::new();
        let x = m.add_var("x", -1.0, 4.0).unwrap();
        let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.set_objective(x, 2.0);
        m.set_objective(y, -1.0);
        m.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 3.0);
        m.add_constraint("ylo", vec![(y, 1.0)], Relation::Ge, -2.0);
        let s = solve(&m).unwrap();
        assert!((s.values[x] - 4.0).abs() < 1e-9);
        assert!((s.values[y] + 1.0).abs() < 1e-9);
        assert!((s.objective - 9.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_cap() {
        let mut m = LpModel::new();
        let x = m.add_nonneg("x").unwrap();
        let y = m.add_nonneg("y").unwrap();
        m.set_objective(x, 1.0);
        m.set_objective(y, 1.0);
        m.add_constraint("a", vec![(x, 1.0)], Relation::Le, 1.0);
        m.add_constraint("b", vec![(y, 1.0)], Relation::Le, 1.0);
        let opts = SimplexOptions {
            pivot_cap: 1,
            rule: PivotRule::Bland,
        };
        assert!(matches!(solve_with(&m, &opts), Err(Error::IterationLimit(1))));
    }
}
