//! Relay degree-distribution design by linear programming.
//!
//! Success of the asymptotic decoder down to erasure `delta` requires
//! `phi(x) >= -ln(1 - x) / mu` on `[0, 1 - delta]`. Sampling that condition
//! on an equidistant grid turns the overhead minimization into an LP, either
//! over the decoder-side edge distribution directly ([`build_lp1`]) or over
//! the relay edge distribution with the own-bit removal folded into the
//! coefficients ([`build_lp2`]). [`sweep_design`] solves the relay LP over a
//! range of mean variable degrees and keeps the cheapest design.

pub mod simplex;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::degree_dist::{edge_to_node, residual_ratio, DegreeDistribution, Perspective};
use crate::density_evolution::DecoderModel;
use crate::error::{Error, Result};
pub use simplex::{solve_lp, LpOutcome, LpProblem, LpSolution};

/// Masses below this are dropped from a solved design.
pub const CLEANUP_THRESHOLD: f64 = 1e-6;
/// Ratio between the verification grid and the LP grid.
pub const VERIFY_REFINEMENT: usize = 10;
const MAX_CUT_ROUNDS: usize = 12;
/// Shortfall on the verification grid that triggers a cut.
const CUT_TOL: f64 = 1e-9;

/// Which power of `x` multiplies a relay edge coefficient in the relay LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerBasis {
    /// `x^(j-1)`, indexed by the relay degree `j`. Reproduces the published
    /// ten-user design.
    #[default]
    Relay,
    /// `x^(d-1)`, indexed by the degree `d` left after own-bit removal. This
    /// is the exact decoder-side condition.
    Residual,
}

impl std::str::FromStr for PowerBasis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relay" => Ok(PowerBasis::Relay),
            "residual" => Ok(PowerBasis::Residual),
            other => Err(Error::Config(format!("unknown power basis '{other}'"))),
        }
    }
}

impl std::fmt::Display for PowerBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PowerBasis::Relay => "relay",
            PowerBasis::Residual => "residual",
        })
    }
}

/// `m` equidistant points `0 = x_1 < ... < x_m = 1 - delta`.
pub fn design_grid(delta: f64, m: usize) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must be in (0,1), got {delta}")));
    }
    if m < 2 {
        return Err(Error::Domain(format!("need at least 2 grid points, got {m}")));
    }
    let top = 1.0 - delta;
    Ok((0..m).map(|n| top * n as f64 / (m - 1) as f64).collect())
}

fn rhs_at(x: f64, mu: f64) -> f64 {
    -(1.0 - x).ln() / mu
}

fn check_common(mu: f64, max_degree: usize, delta: f64, m: usize) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("mean variable degree must be positive, got {mu}")));
    }
    if max_degree < 2 {
        return Err(Error::Domain(format!("max degree must be at least 2, got {max_degree}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must be in (0,1), got {delta}")));
    }
    if m < 10 {
        return Err(Error::Domain(format!("need at least 10 grid points, got {m}")));
    }
    Ok(())
}

/// LP over the decoder-side edge distribution `phi_1..phi_{D-1}`:
/// minimize `sum phi_j / j` subject to `phi(x_n) >= -ln(1 - x_n) / mu_bar`.
pub fn build_lp1(mu_bar: f64, max_degree: usize, delta: f64, m: usize) -> Result<LpProblem> {
    check_common(mu_bar, max_degree, delta, m)?;
    let grid = design_grid(delta, m)?;
    let n = max_degree - 1;
    let rows = grid
        .iter()
        .map(|&x| (0..n).map(|k| x.powi(k as i32)).collect())
        .collect();
    Ok(LpProblem {
        objective: (1..=n).map(|j| 1.0 / j as f64).collect(),
        rhs: grid.iter().map(|&x| rhs_at(x, mu_bar)).collect(),
        rows,
        upper: vec![1.0; n],
        sum_to_one: true,
        grid,
    })
}

/// Weight `d C(r-1,d) / (j C(r,j))` linking relay edge mass at degree `j`
/// to decoder-side degree `d`.
pub fn lp2_weight(r: usize, d: usize, j: usize) -> f64 {
    if d == 0 || j == 0 {
        return 0.0;
    }
    d as f64 * residual_ratio(r as u64, d as u64, j as u64) / j as f64
}

fn lp2_row(x: f64, r: usize, max_degree: usize, basis: PowerBasis) -> Vec<f64> {
    (1..=max_degree)
        .map(|j| {
            [j - 1, j]
                .into_iter()
                .filter(|&d| d >= 1 && d <= max_degree && d < r)
                .map(|d| {
                    let power = match basis {
                        PowerBasis::Relay => j - 1,
                        PowerBasis::Residual => d - 1,
                    };
                    lp2_weight(r, d, j) * x.powi(power as i32)
                })
                .sum()
        })
        .collect()
}

fn lp2_on_points(
    gamma_bar: f64,
    r: usize,
    max_degree: usize,
    points: Vec<f64>,
    basis: PowerBasis,
) -> LpProblem {
    LpProblem {
        objective: (1..=max_degree).map(|d| 1.0 / d as f64).collect(),
        rows: points.iter().map(|&x| lp2_row(x, r, max_degree, basis)).collect(),
        rhs: points.iter().map(|&x| rhs_at(x, gamma_bar)).collect(),
        upper: vec![1.0; max_degree],
        sum_to_one: true,
        grid: points,
    }
}

/// LP over the relay edge distribution `gamma_1..gamma_D`.
pub fn build_lp2(
    gamma_bar: f64,
    r: usize,
    max_degree: usize,
    delta: f64,
    m: usize,
    basis: PowerBasis,
) -> Result<LpProblem> {
    check_common(gamma_bar, max_degree, delta, m)?;
    if max_degree > r {
        return Err(Error::Constraint(format!(
            "max degree {max_degree} exceeds user count {r}"
        )));
    }
    Ok(lp2_on_points(gamma_bar, r, max_degree, design_grid(delta, m)?, basis))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignParams {
    pub r: usize,
    pub max_degree: usize,
    pub delta: f64,
    pub m: usize,
    pub sweep_grid: Vec<f64>,
    pub basis: PowerBasis,
}

impl DesignParams {
    /// Defaults: `D = r`, `delta = 0.02`, 200 grid points, sweep
    /// `1.0, 1.05, ..., 20.0`.
    pub fn new(r: usize) -> Self {
        Self {
            r,
            max_degree: r,
            delta: 0.02,
            m: 200,
            sweep_grid: default_sweep_grid(),
            basis: PowerBasis::default(),
        }
    }
}

pub fn default_sweep_grid() -> Vec<f64> {
    (0..=380).map(|i| 1.0 + 0.05 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gamma_bar: f64,
    /// `sum gamma_d / d` at the optimum, `None` if infeasible.
    pub objective: Option<f64>,
    /// `gamma_bar * objective`.
    pub overhead: Option<f64>,
    /// Optimal relay edge distribution before cleanup.
    pub solution: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct DesignResult {
    pub gamma_edge: DegreeDistribution,
    pub gamma_node: DegreeDistribution,
    /// `sum gamma_d / d` of the cleaned edge distribution.
    pub objective_value: f64,
    /// Overhead estimate `gamma_bar * objective_value` used to rank sweep points.
    pub lp_overhead: f64,
    /// Asymptotic overhead at which the design reaches erasure `delta`.
    pub design_overhead: f64,
    pub sweep_parameter: f64,
    pub sweep: Vec<SweepPoint>,
}

/// Relay LP with its refined verification grid precomputed; the constraint
/// rows do not depend on the sweep value.
struct RelayLp<'a> {
    params: &'a DesignParams,
    coarse: Vec<f64>,
    fine: Vec<f64>,
    fine_rows: Vec<Vec<f64>>,
}

impl<'a> RelayLp<'a> {
    fn new(params: &'a DesignParams) -> Result<Self> {
        check_common(1.0, params.max_degree, params.delta, params.m)?;
        if params.max_degree > params.r {
            return Err(Error::Constraint(format!(
                "max degree {} exceeds user count {}",
                params.max_degree, params.r
            )));
        }
        let coarse = design_grid(params.delta, params.m)?;
        let fine = design_grid(params.delta, (params.m - 1) * VERIFY_REFINEMENT + 1)?;
        let fine_rows = fine
            .iter()
            .map(|&x| lp2_row(x, params.r, params.max_degree, params.basis))
            .collect();
        Ok(Self {
            params,
            coarse,
            fine,
            fine_rows,
        })
    }

    fn solve(&self, gamma_bar: f64) -> Result<Option<(LpProblem, LpSolution)>> {
        let p = self.params;
        check_common(gamma_bar, p.max_degree, p.delta, p.m)?;
        let mut points = self.coarse.clone();
        let mut problem = lp2_on_points(gamma_bar, p.r, p.max_degree, points.clone(), p.basis);
        for _ in 0..MAX_CUT_ROUNDS {
            let Some(sol) = solve_lp(&problem)?.optimal() else {
                return Ok(None);
            };
            let mut cuts: Vec<f64> = self
                .fine
                .iter()
                .zip(&self.fine_rows)
                .filter(|(&x, row)| {
                    let lhs: f64 = row.iter().zip(&sol.x).map(|(a, v)| a * v).sum();
                    lhs < rhs_at(x, gamma_bar) - CUT_TOL
                })
                .map(|(&x, _)| x)
                .collect();
            if cuts.is_empty() {
                return Ok(Some((problem, sol)));
            }
            points.append(&mut cuts);
            points.sort_by(f64::total_cmp);
            points.dedup();
            problem = lp2_on_points(gamma_bar, p.r, p.max_degree, points.clone(), p.basis);
        }
        Err(Error::Numerical(format!(
            "cutting planes did not settle at gamma_bar = {gamma_bar}"
        )))
    }
}

/// Solves the relay LP at one sweep value, adding cuts until the solution
/// holds on the refined verification grid.
pub fn solve_lp2_verified(
    gamma_bar: f64,
    params: &DesignParams,
) -> Result<Option<(LpProblem, LpSolution)>> {
    RelayLp::new(params)?.solve(gamma_bar)
}

/// Largest shortfall of `gamma_edge` against the relay LP constraints on a
/// grid of `points` abscissae over `[0, 1 - delta]`.
pub fn constraint_shortfall(
    gamma_edge: &DegreeDistribution,
    gamma_bar: f64,
    params: &DesignParams,
    points: usize,
) -> Result<f64> {
    let x: Vec<f64> = (1..=params.max_degree).map(|d| gamma_edge.prob(d)).collect();
    let grid = design_grid(params.delta, points)?;
    Ok(grid
        .iter()
        .map(|&g| {
            let row = lp2_row(g, params.r, params.max_degree, params.basis);
            let lhs: f64 = row.iter().zip(&x).map(|(a, v)| a * v).sum();
            rhs_at(g, gamma_bar) - lhs
        })
        .fold(0.0f64, f64::max))
}

/// Solves the relay LP at every sweep value and returns the feasible design
/// with the smallest overhead estimate; ties keep the earliest sweep value.
pub fn sweep_design(params: &DesignParams) -> Result<DesignResult> {
    if params.sweep_grid.is_empty() {
        return Err(Error::Domain("empty sweep grid".into()));
    }
    let lp = RelayLp::new(params)?;
    let sweep: Vec<SweepPoint> = params
        .sweep_grid
        .par_iter()
        .map(|&gamma_bar| -> Result<SweepPoint> {
            Ok(match lp.solve(gamma_bar)? {
                Some((_, sol)) => SweepPoint {
                    gamma_bar,
                    objective: Some(sol.objective),
                    overhead: Some(gamma_bar * sol.objective),
                    solution: Some(sol.x),
                },
                None => SweepPoint {
                    gamma_bar,
                    objective: None,
                    overhead: None,
                    solution: None,
                },
            })
        })
        .collect::<Result<_>>()?;

    let mut ranked: Vec<usize> = (0..sweep.len()).filter(|&i| sweep[i].overhead.is_some()).collect();
    if ranked.is_empty() {
        return Err(Error::NoDesign(sweep.len()));
    }
    ranked.sort_by(|&a, &b| {
        sweep[a]
            .overhead
            .unwrap()
            .total_cmp(&sweep[b].overhead.unwrap())
            .then(a.cmp(&b))
    });
    for idx in ranked {
        let point = &sweep[idx];
        let mut probs = vec![0.0];
        probs.extend(point.solution.as_ref().unwrap().iter().map(|v| v.max(0.0)));
        let raw = DegreeDistribution::normalized(Perspective::Edge, probs)?;
        let gamma_edge = raw.cleaned(CLEANUP_THRESHOLD)?;
        let gamma_node = edge_to_node(&gamma_edge)?;
        let model = DecoderModel::new(&gamma_node, params.r)?;
        let design_overhead = match model.threshold_overhead(params.delta) {
            Ok(e) => e,
            Err(Error::Constraint(_)) => continue,
            Err(e) => return Err(e),
        };
        let objective_value = gamma_edge.inverse_degree_sum();
        let gamma_bar = point.gamma_bar;
        return Ok(DesignResult {
            gamma_edge,
            gamma_node,
            objective_value,
            lp_overhead: gamma_bar * objective_value,
            design_overhead,
            sweep_parameter: gamma_bar,
            sweep,
        });
    }
    Err(Error::NoDesign(params.sweep_grid.len()))
}

/// Plain-text design report: parameters, the sweep table and the winning
/// relay distribution in node perspective.
pub fn design_report(params: &DesignParams, result: &DesignResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# users={}", params.r);
    let _ = writeln!(out, "# max_degree={}", params.max_degree);
    let _ = writeln!(out, "# delta={}", params.delta);
    let _ = writeln!(out, "# grid_points={}", params.m);
    let _ = writeln!(out, "# power_basis={}", params.basis);
    let _ = writeln!(out, "# selected_gamma_bar={:.6}", result.sweep_parameter);
    let _ = writeln!(out, "# objective={:.16e}", result.objective_value);
    let _ = writeln!(out, "# lp_overhead={:.16e}", result.lp_overhead);
    let _ = writeln!(out, "# design_overhead={:.16e}", result.design_overhead);
    let _ = writeln!(out, "gamma_bar\tfeasible\tobjective\toverhead");
    for p in &result.sweep {
        match (p.objective, p.overhead) {
            (Some(o), Some(e)) => {
                let _ = writeln!(out, "{:.6}\tyes\t{o:.16e}\t{e:.16e}", p.gamma_bar);
            }
            _ => {
                let _ = writeln!(out, "{:.6}\tno\t-\t-", p.gamma_bar);
            }
        }
    }
    out.push_str("# relay distribution\n");
    out.push_str(&result.gamma_node.to_text());
    out
}
