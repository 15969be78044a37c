//! Oracles and generators shared by the integration suites.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use emr_dlt::degree_dist::{decoder_side_dist, node_to_edge, edge_to_node, DegreeDistribution, Perspective};
use emr_dlt::density_evolution::evolve;
use emr_dlt::dlt_codec::{remove_own_bits, select_distinct, CheckNode, DecodeGraph, RelayState, UserCodedBit};
use emr_dlt::lp_design::simplex::{solve_lp, LpOutcome, LpProblem};

pub fn random_dist<R: Rng>(rng: &mut R, perspective: Perspective, max_degree: usize) -> DegreeDistribution {
    let mut w = vec![0.0; max_degree + 1];
    for x in w.iter_mut().skip(1) {
        if rng.gen_bool(0.6) {
            *x = rng.gen::<f64>();
        }
    }
    w[1 + rng.gen_range(0..max_degree)] += 0.1;
    DegreeDistribution::normalized(perspective, w).unwrap()
}

// ---------------------------------------------------------------- peeling

pub struct Instance {
    pub num_vars: usize,
    pub truth: Vec<bool>,
    pub checks: Vec<CheckNode>,
}

/// Random consistent check set over `n` variables with degrees 1..=4.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize) -> Instance {
    let truth: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let m = rng.gen_range(n / 2..=2 * n);
    let checks = (0..m)
        .map(|_| {
            let d = if rng.gen_bool(0.2) { 1 } else { rng.gen_range(2..=4) };
            let vars: Vec<u32> = select_distinct(n, d, rng).into_iter().map(|v| v as u32).collect();
            let value = vars.iter().fold(false, |a, &v| a ^ truth[v as usize]);
            CheckNode { value, vars }
        })
        .collect();
    Instance { num_vars: n, truth, checks }
}

/// Quadratic rescan peeler: sweep all checks, resolve any with a single
/// unknown neighbour, repeat until a sweep changes nothing.
pub fn naive_peel(n: usize, checks: &[CheckNode]) -> Vec<Option<bool>> {
    let mut values = vec![None; n];
    loop {
        let mut changed = false;
        for c in checks {
            let unknown: Vec<u32> = c.vars.iter().copied().filter(|&v| values[v as usize].is_none()).collect();
            if unknown.len() == 1 {
                let known = c
                    .vars
                    .iter()
                    .filter_map(|&v| values[v as usize])
                    .fold(c.value, |a, b: bool| a ^ b);
                values[unknown[0] as usize] = Some(known);
                changed = true;
            }
        }
        if !changed {
            return values;
        }
    }
}

pub fn graph_peel(inst: &Instance) -> Vec<Option<bool>> {
    let mut g = DecodeGraph::new(inst.num_vars);
    for c in &inst.checks {
        g.add_check(c.clone()).unwrap();
    }
    g.peel().unwrap();
    g.values().to_vec()
}

/// Random insertion order, peeling after each insertion, randomized ripple.
pub fn graph_peel_shuffled(inst: &Instance, rng: &mut ChaCha8Rng) -> Vec<Option<bool>> {
    let order = select_distinct(inst.checks.len(), inst.checks.len(), rng);
    let mut g = DecodeGraph::new(inst.num_vars);
    for i in order {
        g.add_check(inst.checks[i].clone()).unwrap();
        if rng.gen_bool(0.3) {
            g.peel_randomized(rng).unwrap();
        }
    }
    g.peel_randomized(rng).unwrap();
    g.values().to_vec()
}

pub fn recovered_set(values: &[Option<bool>]) -> Vec<usize> {
    values.iter().enumerate().filter(|(_, v)| v.is_some()).map(|(i, _)| i).collect()
}

/// Checks (c) and (d) over `count` instances; returns the number of
/// mismatching instances for each.
pub fn peeling_suite(rng: &mut ChaCha8Rng, count: usize, n: usize) -> (usize, usize) {
    let (mut confluence_bad, mut oracle_bad) = (0, 0);
    for _ in 0..count {
        let inst = random_instance(rng, n);
        let base = graph_peel(&inst);
        for (v, t) in base.iter().zip(&inst.truth) {
            assert!(v.map_or(true, |b| b == *t), "peeling produced a wrong value");
        }
        let orders_agree = (0..3).all(|_| recovered_set(&graph_peel_shuffled(&inst, rng)) == recovered_set(&base));
        if !orders_agree {
            confluence_bad += 1;
        }
        if naive_peel(n, &inst.checks) != base {
            oracle_bad += 1;
        }
    }
    (confluence_bad, oracle_bad)
}

// ---------------------------------------------------------------- transforms

/// Largest coefficient error of node -> edge -> node and edge -> node -> edge.
pub fn round_trip_error(d: &DegreeDistribution) -> f64 {
    let back = match d.perspective() {
        Perspective::Node => edge_to_node(&node_to_edge(d).unwrap()).unwrap(),
        Perspective::Edge => node_to_edge(&edge_to_node(d).unwrap()).unwrap(),
    };
    let n = d.max_degree().max(back.max_degree());
    (0..=n).map(|i| (d.prob(i) - back.prob(i)).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- decoder side

/// Empirical degree counts at user 0 after own-bit removal, built with the
/// relay buffer and combiner. Index 0 counts discarded bits.
pub fn empirical_decoder_side(gamma: &DegreeDistribution, r: usize, samples: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut relay = RelayState::new(r);
    for u in 0..r {
        relay.update(
            u,
            Some(UserCodedBit { source_user: u, info_indices: vec![0], value: false }),
        );
    }
    let own = [false];
    let mut counts = vec![0u64; r + 1];
    for phase in 0..samples as u64 {
        let x = relay.combine(gamma, rng, phase).unwrap();
        let d = remove_own_bits(&x, 0, &own).map_or(0, |c| c.vars.len());
        counts[d] += 1;
    }
    counts
}

/// Largest per-degree deviation from the analytic masses, in standard
/// deviations of the binomial count.
pub fn decoder_side_zscore(gamma: &DegreeDistribution, r: usize, counts: &[u64]) -> f64 {
    let side = decoder_side_dist(gamma, r).unwrap();
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let mut worst = 0.0f64;
    for (d, &c) in counts.iter().enumerate() {
        let p = side.raw.get(d).copied().unwrap_or(0.0);
        let sd = (nf * p * (1.0 - p)).sqrt();
        let dev = (c as f64 - nf * p).abs();
        if sd == 0.0 {
            assert_eq!(c, 0, "degree {d} observed but has zero mass");
        } else {
            worst = worst.max(dev / sd);
        }
    }
    // normalized form over the kept bits
    let kept = nf - counts[0] as f64;
    for d in 1..counts.len() {
        let p = side.dist.prob(d);
        let sd = (kept * p * (1.0 - p)).sqrt();
        if sd > 0.0 {
            worst = worst.max((counts[d] as f64 - kept * p).abs() / sd);
        }
    }
    worst
}

// ---------------------------------------------------------------- LP

/// Random small LP with a finite box so that it is never unbounded.
pub fn random_lp<R: Rng>(rng: &mut R) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=4);
    let sum_to_one = rng.gen_bool(0.4);
    let objective = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let rhs = (0..m).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let upper = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
    LpProblem { objective, rows, rhs, upper, sum_to_one, grid: vec![] }
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[row][k] -= f * a[col][k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Minimum objective over all basic feasible points, `None` if infeasible.
pub fn vertex_enumeration(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    // candidate active constraints as (coefficients, rhs)
    let mut cands: Vec<(Vec<f64>, f64)> = p.rows.iter().cloned().zip(p.rhs.iter().copied()).collect();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        cands.push((e.clone(), 0.0));
        cands.push((e, p.upper[i]));
    }
    let fixed = usize::from(p.sum_to_one);
    let mut best: Option<f64> = None;
    combinations(cands.len(), n - fixed, &mut |idx| {
        let mut a: Vec<Vec<f64>> = idx.iter().map(|&i| cands[i].0.clone()).collect();
        let mut b: Vec<f64> = idx.iter().map(|&i| cands[i].1).collect();
        if p.sum_to_one {
            a.push(vec![1.0; n]);
            b.push(1.0);
        }
        if let Some(x) = solve_square(a, b) {
            if p.max_violation(&x) <= 1e-9 {
                let v = p.objective_at(&x);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    best
}

pub struct LpTally {
    pub mismatches: usize,
    pub optimal: usize,
    pub infeasible: usize,
}

/// Compares simplex with enumeration on `count` random problems.
pub fn lp_suite<R: Rng>(rng: &mut R, count: usize) -> LpTally {
    let mut t = LpTally { mismatches: 0, optimal: 0, infeasible: 0 };
    for _ in 0..count {
        let p = random_lp(rng);
        let oracle = vertex_enumeration(&p);
        if oracle.is_some() {
            t.optimal += 1;
        } else {
            t.infeasible += 1;
        }
        let ok = match (solve_lp(&p).unwrap(), oracle) {
            (LpOutcome::Optimal(s), Some(v)) => (s.objective - v).abs() <= 1e-6 && p.max_violation(&s.x) <= 1e-7,
            (LpOutcome::Infeasible, None) => true,
            _ => false,
        };
        if !ok {
            t.mismatches += 1;
        }
    }
    t
}

// ---------------------------------------------------------------- DE

/// Fixed-point residual `|f(P) - P|` at the end of a converged recursion.
pub fn de_residual<R: Rng>(rng: &mut R, tol: f64) -> f64 {
    let phi = random_dist(rng, Perspective::Edge, 12);
    let mu = rng.gen_range(0.1..8.0);
    let res = evolve(&phi, mu, 1_000_000, tol).unwrap();
    assert!(res.converged);
    let p = res.fixed_point;
    ((-mu * phi.eval(1.0 - p)).exp() - p).abs()
}
