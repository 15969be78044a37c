//! Asymptotic erasure tracking for the user-side peeling decoder.
//!
//! The recursion is `P_l = exp(-mu * phi(1 - P_{l-1}))` from `P_0 = 1`, where
//! `phi` is the decoder-side check distribution in edge perspective and `mu`
//! the mean variable-node degree. A reception overhead `eps` maps to
//! `mu = eps * a`, with `a` the mean decoder-side check degree: every kept
//! relay bit adds `a` edges spread over the `(r-1)K` foreign variables.
//! Relay bits that lose all foreign contributions are not counted.

use std::io::Write;

use crate::degree_dist::{decoder_side_dist, node_to_edge, DegreeDistribution, Perspective};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub trajectory: Vec<f64>,
    pub fixed_point: f64,
    pub converged: bool,
    pub iterations_used: usize,
}

fn check_edge(phi: &DegreeDistribution) -> Result<()> {
    if phi.perspective() != Perspective::Edge || !phi.is_decoder_ready() {
        return Err(Error::InvalidDistribution(
            "density evolution needs an edge-perspective distribution without degree-0 mass"
                .into(),
        ));
    }
    Ok(())
}

/// Runs the recursion until successive values differ by less than `tol`.
pub fn evolve(phi: &DegreeDistribution, mu_bar: f64, max_iters: usize, tol: f64) -> Result<DeResult> {
    check_edge(phi)?;
    if !(mu_bar.is_finite() && mu_bar > 0.0) {
        return Err(Error::Domain(format!("mean variable degree must be positive, got {mu_bar}")));
    }
    let mut trajectory = vec![1.0];
    let mut p = 1.0f64;
    let mut converged = false;
    let mut iterations_used = 0;
    for _ in 0..max_iters {
        let next = (-mu_bar * phi.eval(1.0 - p)).exp().clamp(0.0, 1.0).min(p);
        iterations_used += 1;
        trajectory.push(next);
        let step = (p - next).abs();
        p = next;
        if step < tol {
            converged = true;
            break;
        }
    }
    Ok(DeResult {
        trajectory,
        fixed_point: p,
        converged,
        iterations_used,
    })
}

/// Decoder-side view of a relay distribution: everything needed to map
/// overhead to erasure probability for one user.
#[derive(Debug, Clone)]
pub struct DecoderModel {
    pub r: usize,
    /// Share of relay bits discarded after own-bit removal.
    pub phi0: f64,
    /// Decoder-side check distribution, edge perspective.
    pub phi_edge: DegreeDistribution,
    /// Mean decoder-side check degree.
    pub avg_check_degree: f64,
}

impl DecoderModel {
    pub fn new(gamma: &DegreeDistribution, r: usize) -> Result<Self> {
        let side = decoder_side_dist(gamma, r)?;
        let avg_check_degree = side.dist.mean();
        let phi_edge = node_to_edge(&side.dist)?;
        Ok(Self {
            r,
            phi0: side.phi0,
            phi_edge,
            avg_check_degree,
        })
    }

    /// Model for a single-source LT code: the check distribution is used as is.
    pub fn from_check_dist(omega: &DegreeDistribution) -> Result<Self> {
        let phi_edge = node_to_edge(omega)?;
        Ok(Self {
            r: 2,
            phi0: 0.0,
            phi_edge,
            avg_check_degree: omega.mean(),
        })
    }

    pub fn mu_bar(&self, overhead: f64) -> f64 {
        overhead * self.avg_check_degree
    }

    pub fn erasure_at(&self, overhead: f64) -> Result<f64> {
        self.erasure_at_with(overhead, DEFAULT_MAX_ITERS, DEFAULT_TOL)
    }

    pub fn erasure_at_with(&self, overhead: f64, max_iters: usize, tol: f64) -> Result<f64> {
        if !overhead.is_finite() || overhead < 0.0 {
            return Err(Error::Domain(format!("overhead must be non-negative, got {overhead}")));
        }
        if overhead == 0.0 {
            return Ok(1.0);
        }
        Ok(evolve(&self.phi_edge, self.mu_bar(overhead), max_iters, tol)?.fixed_point)
    }

    /// Smallest `mu` for which the recursion from `P_0 = 1` ends at or below
    /// `delta`: the supremum of `-ln p / phi(1 - p)` over `p` in `(delta, 1)`.
    /// `None` when no degree-1 checks exist and decoding never starts.
    pub fn threshold_mu(&self, delta: f64) -> Option<f64> {
        if self.phi_edge.prob(1) <= 0.0 {
            return None;
        }
        let ratio = |p: f64| -p.ln() / self.phi_edge.eval(1.0 - p);
        const SCAN: usize = 20_000;
        let step = (1.0 - delta) / SCAN as f64;
        let (mut best_i, mut best) = (0usize, ratio(delta));
        for i in 1..SCAN {
            let v = ratio(delta + i as f64 * step);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        if best_i == 0 {
            return Some(best);
        }
        // Golden-section refinement around the scanned maximum.
        let (mut lo, mut hi) = (
            delta + (best_i - 1) as f64 * step,
            (delta + (best_i + 1) as f64 * step).min(1.0 - 1e-15),
        );
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if ratio(a) > ratio(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        Some(best.max(ratio(0.5 * (lo + hi))))
    }

    /// Reception overhead at which the asymptotic erasure rate reaches
    /// `delta`. A small relative margin above the tangency point keeps the
    /// recursion from stalling there.
    pub fn threshold_overhead(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("target erasure must be in (0,1), got {delta}")));
        }
        let mu = self.threshold_mu(delta).ok_or_else(|| {
            Error::Constraint("no degree-1 checks at the decoder; decoding never starts".into())
        })?;
        let mut eps = mu / self.avg_check_degree * (1.0 + 1e-4);
        for _ in 0..50 {
            if self.erasure_at(eps)? <= delta {
                return Ok(eps);
            }
            eps *= 1.0 + 1e-4;
        }
        Err(Error::Numerical(format!(
            "recursion did not reach {delta} near the computed threshold"
        )))
    }

    pub fn curve(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        grid.iter().map(|&e| Ok((e, self.erasure_at(e)?))).collect()
    }
}

/// Asymptotic erasure probability at reception overhead `overhead` for a
/// user decoding relay bits drawn from `gamma` with `r` users.
pub fn erasure_at_overhead(gamma: &DegreeDistribution, r: usize, overhead: f64) -> Result<f64> {
    DecoderModel::new(gamma, r)?.erasure_at(overhead)
}

/// Evenly spaced overhead grid `start, start+step, ..., <= stop`.
pub fn overhead_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || start < 0.0 {
        return Err(Error::Domain(format!(
            "bad overhead grid start={start} stop={stop} step={step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Writes `overhead,erasure_rate` rows.
pub fn write_curve_csv<W: Write>(mut out: W, curve: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(out, "overhead,erasure_rate")?;
    for (e, p) in curve {
        writeln!(out, "{e:.6},{p:.16e}")?;
    }
    Ok(())
}
