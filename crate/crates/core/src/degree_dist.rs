//! Degree distributions and the transforms between them.
//!
//! A [`DegreeDistribution`] is a probability vector indexed by degree. Node
//! perspective stores `P(node has degree d)`; edge perspective stores
//! `P(random edge attaches to a node of degree d)`. The polynomial conventions
//! follow the usual LT notation: `Omega(x) = sum_d Omega_d x^d` for nodes and
//! `omega(x) = sum_d omega_d x^(d-1)` for edges.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Largest user count for which binomials are evaluated with exact integers.
const EXACT_BINOMIAL_LIMIT: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perspective {
    Node,
    Edge,
}

impl Perspective {
    fn as_str(self) -> &'static str {
        match self {
            Perspective::Node => "node",
            Perspective::Edge => "edge",
        }
    }
}

impl FromStr for Perspective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "node" => Ok(Perspective::Node),
            "edge" => Ok(Perspective::Edge),
            other => Err(Error::InvalidDistribution(format!(
                "unknown perspective '{other}'"
            ))),
        }
    }
}

/// Probability vector over degrees. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    perspective: Perspective,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl DegreeDistribution {
    /// Builds a distribution from a dense vector where `probs[d]` is the mass
    /// of degree `d`. Trailing zeros are trimmed.
    pub fn new(perspective: Perspective, mut probs: Vec<f64>) -> Result<Self> {
        while probs.len() > 1 && probs[probs.len() - 1] == 0.0 {
            probs.pop();
        }
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        for (d, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidDistribution(format!(
                    "mass {p} at degree {d} is outside [0, 1]"
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            perspective,
            probs,
            cdf,
        })
    }

    /// Builds from sparse `(degree, probability)` pairs. Repeated degrees add up.
    pub fn from_pairs(perspective: Perspective, pairs: &[(usize, f64)]) -> Result<Self> {
        let max = pairs.iter().map(|&(d, _)| d).max().unwrap_or(0);
        let mut probs = vec![0.0; max + 1];
        for &(d, p) in pairs {
            probs[d] += p;
        }
        Self::new(perspective, probs)
    }

    /// Rescales non-negative weights to unit mass.
    pub fn normalized(perspective: Perspective, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights have zero total mass".into()));
        }
        Self::new(perspective, weights.into_iter().map(|w| w / total).collect())
    }

    /// `Omega(x) = x^d`.
    pub fn single(perspective: Perspective, degree: usize) -> Self {
        let mut probs = vec![0.0; degree + 1];
        probs[degree] = 1.0;
        Self::new(perspective, probs).expect("point mass is valid")
    }

    pub fn perspective(&self) -> Perspective {
        self.perspective
    }

    /// Dense mass vector, `probs()[d]` is the mass of degree `d`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, degree: usize) -> f64 {
        self.probs.get(degree).copied().unwrap_or(0.0)
    }

    pub fn max_degree(&self) -> usize {
        self.probs.len() - 1
    }

    /// Degrees carrying non-zero mass, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(d, _)| d)
            .collect()
    }

    /// True when there is no mass at degree 0.
    pub fn is_decoder_ready(&self) -> bool {
        self.prob(0) == 0.0
    }

    /// Mean degree `sum_d d p_d`. For a node distribution this is `Omega'(1)`.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(d, &p)| d as f64 * p)
            .sum()
    }

    /// `sum_{d>=1} p_d / d`. For an edge distribution this is the reciprocal
    /// of the node-perspective mean degree.
    pub fn inverse_degree_sum(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(d, &p)| p / d as f64)
            .sum()
    }

    /// Evaluates the generating polynomial: `sum p_d x^d` for nodes and
    /// `sum p_d x^(d-1)` for edges.
    pub fn eval(&self, x: f64) -> f64 {
        let shift = match self.perspective {
            Perspective::Node => 0,
            Perspective::Edge => 1,
        };
        // Horner over [p_shift, p_shift+1, ...]; for nodes the leading term
        // is p_0 x^0.
        self.probs
            .iter()
            .skip(shift)
            .rev()
            .fold(0.0, |acc, &p| acc * x + p)
    }

    /// Inverse-CDF degree sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let total = *self.cdf.last().expect("non-empty");
        let target = u * total;
        let idx = self.cdf.partition_point(|&c| c <= target);
        // Never return a zero-mass degree because of rounding at the top end.
        let mut d = idx.min(self.probs.len() - 1);
        while self.probs[d] == 0.0 && d > 0 {
            d -= 1;
        }
        d
    }

    /// Zeroes masses below `threshold` and renormalizes.
    pub fn cleaned(&self, threshold: f64) -> Result<Self> {
        let weights = self
            .probs
            .iter()
            .map(|&p| if p < threshold { 0.0 } else { p })
            .collect();
        Self::normalized(self.perspective, weights)
    }

    /// Plain-text form: a `# perspective=...` header, then one
    /// `degree<TAB>probability` line per supported degree with 17 significant
    /// digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("# perspective={}\n", self.perspective.as_str());
        for d in self.support() {
            let _ = writeln!(out, "{d}\t{:.16e}", self.probs[d]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut perspective = None;
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("perspective=") {
                    perspective = Some(value.parse::<Perspective>().map_err(|e| {
                        Error::Parse {
                            line: lineno,
                            msg: e.to_string(),
                        }
                    })?);
                }
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(deg), Some(prob), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected 'degree<TAB>probability'".into(),
                });
            };
            let deg: usize = deg.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad degree '{deg}'"),
            })?;
            let prob: f64 = prob.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad probability '{prob}'"),
            })?;
            pairs.push((deg, prob));
        }
        let perspective = perspective.ok_or(Error::Parse {
            line: 1,
            msg: "missing '# perspective=node|edge' header".into(),
        })?;
        if pairs.is_empty() {
            return Err(Error::Parse {
                line: 1,
                msg: "no degree lines".into(),
            });
        }
        Self::from_pairs(perspective, &pairs)
    }

    pub fn read_file(path: &std::path::Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn require(dist: &DegreeDistribution, perspective: Perspective) -> Result<()> {
    if dist.perspective != perspective {
        return Err(Error::InvalidDistribution(format!(
            "expected {}-perspective input",
            perspective.as_str()
        )));
    }
    if !dist.is_decoder_ready() {
        return Err(Error::InvalidDistribution("mass at degree 0".into()));
    }
    Ok(())
}

/// `omega_j = j Omega_j / Omega'(1)`.
pub fn node_to_edge(dist: &DegreeDistribution) -> Result<DegreeDistribution> {
    require(dist, Perspective::Node)?;
    let weights = dist
        .probs
        .iter()
        .enumerate()
        .map(|(d, &p)| d as f64 * p)
        .collect();
    DegreeDistribution::normalized(Perspective::Edge, weights)
}

/// `Omega_j = (omega_j / j) / sum_k (omega_k / k)`.
pub fn edge_to_node(dist: &DegreeDistribution) -> Result<DegreeDistribution> {
    require(dist, Perspective::Edge)?;
    let weights = dist
        .probs
        .iter()
        .enumerate()
        .map(|(d, &p)| if d == 0 { 0.0 } else { p / d as f64 })
        .collect();
    DegreeDistribution::normalized(Perspective::Node, weights)
}

/// Poisson variable-node degrees `e^-mu mu^i / i!` for `i = 0..=max_degree`,
/// with the tail beyond `max_degree` folded into the last entry.
pub fn poisson_variable_dist(mu: f64, max_degree: usize) -> Result<DegreeDistribution> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("Poisson mean must be positive, got {mu}")));
    }
    if max_degree < 1 {
        return Err(Error::Domain("max_degree must be at least 1".into()));
    }
    let mut probs = Vec::with_capacity(max_degree + 1);
    let mut term = (-mu).exp();
    for i in 0..=max_degree {
        if i > 0 {
            term *= mu / i as f64;
        }
        probs.push(term);
    }
    let head: f64 = probs[..max_degree].iter().sum();
    probs[max_degree] = (1.0 - head).max(0.0);
    DegreeDistribution::new(Perspective::Node, probs)
}

/// `C(n, k)` as a float; exact integer arithmetic for `n <= 64`.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= EXACT_BINOMIAL_LIMIT {
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// `C(r-1, d) / C(r, j)`: the probability that a relay bit of degree `j`
/// leaves `d` foreign contributions at a given user (`j = d` own user not
/// picked, `j = d + 1` own user picked).
pub fn residual_ratio(r: u64, d: u64, j: u64) -> f64 {
    if j > r || d > r - 1 {
        return 0.0;
    }
    if r <= EXACT_BINOMIAL_LIMIT {
        binomial(r - 1, d) / binomial(r, j)
    } else {
        (ln_binomial(r - 1, d) - ln_binomial(r, j)).exp()
    }
}

/// Check-node degrees seen by one user's decoder after it strips its own bits.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderSide {
    /// Fraction of relay bits that carry no foreign information.
    pub phi0: f64,
    /// Unnormalized masses including degree 0.
    pub raw: Vec<f64>,
    /// Normalized node-perspective distribution over degrees >= 1.
    pub dist: DegreeDistribution,
}

/// Maps the relay distribution `Gamma` to the distribution observed at a
/// user decoder: `Phi_d = sum_{j=d}^{d+1} Gamma_j C(r-1,d)/C(r,j)` and
/// `Phi_hat_d = Phi_d / (1 - Phi_0)`.
pub fn decoder_side_dist(gamma: &DegreeDistribution, r: usize) -> Result<DecoderSide> {
    require(gamma, Perspective::Node)?;
    if r < 2 {
        return Err(Error::Domain(format!("need at least 2 users, got {r}")));
    }
    let max = gamma.max_degree();
    if max > r {
        return Err(Error::Constraint(format!(
            "relay degree {max} exceeds user count {r}"
        )));
    }
    let r64 = r as u64;
    let raw: Vec<f64> = (0..=max)
        .map(|d| {
            (d..=d + 1)
                .filter(|&j| j >= 1)
                .map(|j| gamma.prob(j) * residual_ratio(r64, d as u64, j as u64))
                .sum()
        })
        .collect();
    let phi0 = raw[0];
    if phi0 >= 1.0 - 1e-15 {
        return Err(Error::InvalidDistribution(
            "every relay bit is useless after own-bit removal".into(),
        ));
    }
    let mut weights = raw.clone();
    weights[0] = 0.0;
    let dist = DegreeDistribution::normalized(Perspective::Node, weights)?;
    Ok(DecoderSide { phi0, raw, dist })
}

/// Robust soliton distribution with spike at `floor(K / S)`,
/// `S = c ln(K / sigma) sqrt(K)`.
pub fn robust_soliton(k: usize, c: f64, sigma: f64) -> Result<DegreeDistribution> {
    if k < 2 {
        return Err(Error::Domain(format!("RSD needs K >= 2, got {k}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Domain(format!("RSD needs c > 0, got {c}")));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("RSD needs 0 < sigma < 1, got {sigma}")));
    }
    let kf = k as f64;
    let s = c * (kf / sigma).ln() * kf.sqrt();
    let spike = ((kf / s).floor() as usize).clamp(1, k);
    let mut weights = vec![0.0; k + 1];
    weights[1] = 1.0 / kf;
    for (d, w) in weights.iter_mut().enumerate().skip(2) {
        *w = 1.0 / (d as f64 * (d as f64 - 1.0));
    }
    for (d, w) in weights.iter_mut().enumerate().take(spike).skip(1) {
        *w += s / (kf * d as f64);
    }
    weights[spike] += s * (s / sigma).ln().max(0.0) / kf;
    DegreeDistribution::normalized(Perspective::Node, weights)
}

/// The relay distribution `0.0058x + 0.4281x^2 + 0.3411x^3 + 0.2250x^10`
/// designed for ten users at target erasure 0.02.
pub fn reference_relay_dist() -> DegreeDistribution {
    DegreeDistribution::from_pairs(
        Perspective::Node,
        &[(1, 0.0058), (2, 0.4281), (3, 0.3411), (10, 0.2250)],
    )
    .expect("coefficients sum to one")
}

/// Raptor-code output distribution with maximum degree 66, renormalised
/// (the published coefficients sum to 0.999998).
pub fn raptor_user_dist() -> DegreeDistribution {
    const COEFFS: [(usize, f64); 10] = [
        (1, 0.007969),
        (2, 0.493570),
        (3, 0.166220),
        (4, 0.072646),
        (5, 0.082558),
        (8, 0.056058),
        (9, 0.037229),
        (19, 0.055590),
        (65, 0.025023),
        (66, 0.003135),
    ];
    let mut w = vec![0.0; 67];
    for (d, p) in COEFFS {
        w[d] = p;
    }
    DegreeDistribution::normalized(Perspective::Node, w).expect("positive weights")
}
