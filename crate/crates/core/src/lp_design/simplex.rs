//! Dense two-phase tableau simplex for small problems of the form
//!
//! ```text
//! minimize    c . x
//! subject to  A x >= b
//!             0 <= x <= u
//!             sum(x) = 1            (optional)
//! ```

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    /// Minimized.
    pub objective: Vec<f64>,
    /// Each row reads `rows[i] . x >= rhs[i]`.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// Upper bounds; `f64::INFINITY` for none. Lower bounds are zero.
    pub upper: Vec<f64>,
    pub sum_to_one: bool,
    /// Grid abscissae the rows were generated from, if any.
    pub grid: Vec<f64>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::Domain("LP has no variables".into()));
        }
        if self.rows.len() != self.rhs.len() {
            return Err(Error::Domain(format!(
                "{} constraint rows but {} right-hand sides",
                self.rows.len(),
                self.rhs.len()
            )));
        }
        if self.upper.len() != n || self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("inconsistent LP dimensions".into()));
        }
        if self.upper.iter().any(|&u| u < 0.0 || u.is_nan()) {
            return Err(Error::Domain("upper bounds must be non-negative".into()));
        }
        let finite = self.objective.iter().chain(self.rhs.iter()).all(|v| v.is_finite())
            && self.rows.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("non-finite LP coefficient".into()));
        }
        if !self.grid.is_empty() && self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("LP grid must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint by `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (row, &b) in self.rows.iter().zip(&self.rhs) {
            let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            worst = worst.max(b - lhs);
        }
        for (&v, &u) in x.iter().zip(&self.upper) {
            worst = worst.max(-v).max(v - u);
        }
        if self.sum_to_one {
            worst = worst.max((x.iter().sum::<f64>() - 1.0).abs());
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

struct Tableau {
    /// Row-major, `width = cols + 1`, last column is the right-hand side.
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    /// Reduced-cost row, same width; last entry is minus the objective.
    cost: Vec<f64>,
    pivots: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.data[row * w + col];
        for v in &mut self.data[row * w..(row + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[row * w..(row + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.data[i * w + col];
            if f != 0.0 {
                for (v, &pr) in self.data[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.data[i * w + col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, &pr) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    fn set_cost(&mut self, costs: &[f64]) {
        self.cost = vec![0.0; self.width()];
        self.cost[..costs.len()].copy_from_slice(costs);
        let w = self.width();
        for i in 0..self.rows {
            let f = self.cost[self.basis[i]];
            if f != 0.0 {
                for j in 0..w {
                    self.cost[j] -= f * self.data[i * w + j];
                }
            }
        }
    }

    /// Iterates to optimality over the columns `allowed` admits.
    fn optimize(&mut self, allowed: impl Fn(usize) -> bool) -> Result<Step> {
        let limit = 50 * (self.rows + self.cols) + 1000;
        let bland_after = 10 * (self.rows + self.cols);
        for iter in 0..limit {
            let bland = iter >= bland_after;
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..self.cols {
                if !allowed(j) {
                    continue;
                }
                let c = self.cost[j];
                if c < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = c;
                }
            }
            let Some(col) = enter else {
                return Ok(Step::Optimal);
            };
            // Harris two-pass ratio test: relax the bound slightly, then take
            // the largest pivot among rows within the relaxed bound.
            let mut bound = f64::INFINITY;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > PIVOT_TOL {
                    bound = bound.min((self.rhs(i).max(0.0) + HARRIS_TOL) / a);
                }
            }
            if bound.is_infinite() {
                return Ok(Step::Unbounded);
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > PIVOT_TOL && self.rhs(i).max(0.0) / a <= bound {
                    let better = match leave {
                        None => true,
                        Some((li, la)) => {
                            if bland {
                                self.basis[i] < self.basis[li]
                            } else {
                                a > la
                            }
                        }
                    };
                    if better {
                        leave = Some((i, a));
                    }
                }
            }
            let (row, _) = leave.expect("bound came from an eligible row");
            self.pivot(row, col);
        }
        Err(Error::Numerical(format!(
            "no convergence after {limit} pivots ({} rows, {} columns)",
            self.rows, self.cols
        )))
    }
}

/// Solves `problem` to an optimal vertex, or reports infeasibility or
/// unboundedness.
pub fn solve_lp(problem: &LpProblem) -> Result<LpOutcome> {
    problem.validate()?;
    if problem.objective.iter().all(|&c| c >= 0.0) {
        if let Some(outcome) = solve_dual(problem)? {
            return Ok(outcome);
        }
    }
    solve_primal(problem)
}

/// Dual simplex from the all-slack basis, which is dual feasible whenever
/// every cost is non-negative. Returns `None` if it stalls, so the caller can
/// fall back to the two-phase primal method.
fn solve_dual(problem: &LpProblem) -> Result<Option<LpOutcome>> {
    let n = problem.num_vars();
    // Every constraint as `g . x <= h`.
    let mut rows: Vec<(Vec<f64>, f64)> = problem
        .rows
        .iter()
        .zip(&problem.rhs)
        .map(|(r, &b)| (r.iter().map(|v| -v).collect(), -b))
        .collect();
    for (k, &u) in problem.upper.iter().enumerate() {
        if u.is_finite() && !(problem.sum_to_one && u >= 1.0) {
            let mut row = vec![0.0; n];
            row[k] = 1.0;
            rows.push((row, u));
        }
    }
    if problem.sum_to_one {
        rows.push((vec![1.0; n], 1.0));
        rows.push((vec![-1.0; n], -1.0));
    }
    let m = rows.len();
    let cols = n + m;
    let width = cols + 1;
    let mut data = vec![0.0; m * width];
    for (i, (g, h)) in rows.iter().enumerate() {
        data[i * width..i * width + n].copy_from_slice(g);
        data[i * width + n + i] = 1.0;
        data[i * width + cols] = *h;
    }
    let mut t = Tableau {
        data,
        rows: m,
        cols,
        basis: (n..n + m).collect(),
        cost: Vec::new(),
        pivots: 0,
    };
    let mut costs = vec![0.0; cols];
    costs[..n].copy_from_slice(&problem.objective);
    t.set_cost(&costs);
    let rhs_scale = 1.0 + problem.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));

    let limit = 20 * (m + cols) + 1000;
    for _ in 0..limit {
        let mut leave = None;
        let mut worst = -FEAS_TOL * rhs_scale * 1e-3;
        for i in 0..t.rows {
            let b = t.rhs(i);
            if b < worst {
                worst = b;
                leave = Some(i);
            }
        }
        let Some(row) = leave else {
            let mut x = vec![0.0; n];
            for (i, &b) in t.basis.iter().enumerate() {
                if b < n {
                    x[b] = t.rhs(i).max(0.0);
                }
            }
            if problem.max_violation(&x) > 1e-7 * rhs_scale {
                return Ok(None);
            }
            return Ok(Some(LpOutcome::Optimal(LpSolution {
                objective: problem.objective_at(&x),
                x,
                pivots: t.pivots,
            })));
        };
        let mut enter: Option<(usize, f64, f64)> = None;
        for j in 0..t.cols {
            let a = t.at(row, j);
            if a < -PIVOT_TOL {
                let ratio = t.cost[j].max(0.0) / -a;
                let better = match enter {
                    None => true,
                    Some((_, br, ba)) => ratio < br - 1e-13 || (ratio <= br + 1e-13 && -a > ba),
                };
                if better {
                    enter = Some((j, ratio, -a));
                }
            }
        }
        let Some((col, _, _)) = enter else {
            return Ok(Some(LpOutcome::Infeasible));
        };
        t.pivot(row, col);
    }
    Ok(None)
}

fn solve_primal(problem: &LpProblem) -> Result<LpOutcome> {
    let n = problem.num_vars();

    // Standard-form rows: (coefficients over structural vars, slack sign, rhs).
    let mut std_rows: Vec<(Vec<f64>, Option<f64>, f64)> = Vec::new();
    for (row, &b) in problem.rows.iter().zip(&problem.rhs) {
        std_rows.push((row.clone(), Some(-1.0), b));
    }
    for (k, &u) in problem.upper.iter().enumerate() {
        // With sum(x) = 1 and x >= 0, bounds of 1 or more are implied.
        if u.is_finite() && !(problem.sum_to_one && u >= 1.0) {
            let mut row = vec![0.0; n];
            row[k] = 1.0;
            std_rows.push((row, Some(1.0), u));
        }
    }
    if problem.sum_to_one {
        std_rows.push((vec![1.0; n], None, 1.0));
    }

    let m = std_rows.len();
    let num_slack = std_rows.iter().filter(|r| r.1.is_some()).count();
    // Normalize to non-negative rhs and decide which rows need an artificial.
    let mut needs_art = Vec::with_capacity(m);
    for (coeffs, slack, b) in std_rows.iter_mut() {
        if *b < 0.0 {
            coeffs.iter_mut().for_each(|v| *v = -*v);
            *slack = slack.map(|s| -s);
            *b = -*b;
        }
        needs_art.push(*slack != Some(1.0));
    }
    let num_art = needs_art.iter().filter(|&&a| a).count();
    let cols = n + num_slack + num_art;
    let width = cols + 1;
    let mut data = vec![0.0; m * width];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (n, n + num_slack);
    for (i, (coeffs, slack, b)) in std_rows.iter().enumerate() {
        data[i * width..i * width + n].copy_from_slice(coeffs);
        if let Some(s) = slack {
            data[i * width + next_slack] = *s;
            if !needs_art[i] {
                basis[i] = next_slack;
            }
            next_slack += 1;
        }
        if needs_art[i] {
            data[i * width + next_art] = 1.0;
            basis[i] = next_art;
            next_art += 1;
        }
        data[i * width + cols] = *b;
    }

    let mut t = Tableau {
        data,
        rows: m,
        cols,
        basis,
        cost: Vec::new(),
        pivots: 0,
    };
    let art_start = n + num_slack;
    let rhs_scale = 1.0 + problem.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));

    if num_art > 0 {
        let mut phase1 = vec![0.0; cols];
        phase1[art_start..].iter_mut().for_each(|c| *c = 1.0);
        t.set_cost(&phase1);
        match t.optimize(|_| true)? {
            Step::Optimal => {}
            Step::Unbounded => {
                return Err(Error::Numerical("phase one reported unbounded".into()))
            }
        }
        let infeasibility = -t.cost[cols];
        if infeasibility > FEAS_TOL * rhs_scale {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut redundant = Vec::new();
        for i in 0..t.rows {
            if t.basis[i] >= art_start {
                let col = (0..art_start)
                    .filter(|&j| t.at(i, j).abs() > 1e-9)
                    .max_by(|&a, &b| t.at(i, a).abs().total_cmp(&t.at(i, b).abs()));
                match col {
                    Some(j) => t.pivot(i, j),
                    None => redundant.push(i),
                }
            }
        }
        if !redundant.is_empty() {
            let w = t.width();
            let keep: Vec<usize> = (0..t.rows).filter(|i| !redundant.contains(i)).collect();
            let mut data = Vec::with_capacity(keep.len() * w);
            for &i in &keep {
                data.extend_from_slice(&t.data[i * w..(i + 1) * w]);
            }
            t.basis = keep.iter().map(|&i| t.basis[i]).collect();
            t.data = data;
            t.rows = keep.len();
        }
    }

    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(&problem.objective);
    t.set_cost(&phase2);
    match t.optimize(|j| j < art_start)? {
        Step::Optimal => {}
        Step::Unbounded => return Ok(LpOutcome::Unbounded),
    }

    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i).max(0.0);
        }
    }
    let violation = problem.max_violation(&x);
    if violation > 1e-7 * rhs_scale {
        return Err(Error::Numerical(format!(
            "solution violates constraints by {violation:e} after {} pivots",
            t.pivots
        )));
    }
    Ok(LpOutcome::Optimal(LpSolution {
        objective: problem.objective_at(&x),
        x,
        pivots: t.pivots,
    }))
}
