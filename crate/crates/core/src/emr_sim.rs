//! Monte Carlo simulation of the multi-way relay protocol.
//!
//! A round is one uplink phase (every user sends a fresh coded bit in its
//! own slot) followed by the relay's broadcast. Each user strips its own
//! contribution from what it hears and peels incrementally. A trial ends
//! when every user has all `(r-1)K` foreign bits or when the broadcast
//! budget runs out. Acknowledgements are free and instantaneous.
//!
//! Randomness comes from independent ChaCha streams per purpose (source
//! data, each encoder, each channel, relay sampling), so runs in different
//! relay modes see the same user bits and channel realisations.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::degree_dist::{DegreeDistribution, Perspective};
use crate::dlt_codec::{
    relay_combine_nobuffer, remove_own_bits, user_encode, DecodeGraph, RelayCodedBit, RelayState,
    UserCodedBit,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelayMode {
    /// One-bit buffer per uplink, broadcasts once all are loaded.
    Buffered,
    /// Combines the current uplink bits; erased ones drop out of the XOR.
    Unbuffered,
    /// Forwards every received uplink bit as is.
    UncodedBroadcast,
}

impl RelayMode {
    pub fn name(self) -> &'static str {
        match self {
            RelayMode::Buffered => "buffered",
            RelayMode::Unbuffered => "unbuffered",
            RelayMode::UncodedBroadcast => "uncoded",
        }
    }
}

impl std::str::FromStr for RelayMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "buffered" => Ok(RelayMode::Buffered),
            "unbuffered" => Ok(RelayMode::Unbuffered),
            "uncoded" => Ok(RelayMode::UncodedBroadcast),
            other => Err(Error::Config(format!("unknown relay mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for RelayMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub r: usize,
    pub k: usize,
    pub eps_up: Vec<f64>,
    pub eps_down: Vec<f64>,
    /// Distribution used by the user encoders.
    pub omega: DegreeDistribution,
    /// Relay check distribution; unused for uncoded broadcast.
    pub gamma: DegreeDistribution,
    pub relay_mode: RelayMode,
    pub max_broadcast_phases: u64,
    pub seed: u64,
}

/// Broadcast budget used when none is given: `5 (r-1) K`.
pub fn default_max_phases(r: usize, k: usize) -> u64 {
    5 * (r as u64 - 1) * k as u64
}

impl NetworkConfig {
    /// Same erasure probabilities on every link, degree-1 user encoders,
    /// buffered relay.
    pub fn symmetric(r: usize, k: usize, eps_up: f64, eps_down: f64, gamma: DegreeDistribution) -> Self {
        Self {
            r,
            k,
            eps_up: vec![eps_up; r],
            eps_down: vec![eps_down; r],
            omega: DegreeDistribution::single(Perspective::Node, 1),
            gamma,
            relay_mode: RelayMode::Buffered,
            max_broadcast_phases: default_max_phases(r.max(2), k),
            seed: 0,
        }
    }

    pub fn with_mode(mut self, mode: RelayMode) -> Self {
        self.relay_mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of foreign bits each user must learn.
    pub fn foreign_bits(&self) -> usize {
        (self.r - 1) * self.k
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 2 {
            return Err(Error::Config(format!("need at least 2 users, got {}", self.r)));
        }
        if self.k < 1 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        for (name, v) in [("eps_up", &self.eps_up), ("eps_down", &self.eps_down)] {
            if v.len() != self.r {
                return Err(Error::Config(format!(
                    "{name} has {} entries for {} users",
                    v.len(),
                    self.r
                )));
            }
            if let Some(p) = v.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Config(format!("{name} value {p} outside [0,1]")));
            }
        }
        for (name, d) in [("omega", &self.omega), ("gamma", &self.gamma)] {
            if d.perspective() != Perspective::Node {
                return Err(Error::InvalidDistribution(format!("{name} must be node perspective")));
            }
        }
        if self.omega.max_degree() > self.k {
            return Err(Error::Config(format!(
                "user distribution reaches degree {} above K = {}",
                self.omega.max_degree(),
                self.k
            )));
        }
        if self.relay_mode != RelayMode::UncodedBroadcast && self.gamma.max_degree() > self.r {
            return Err(Error::Config(format!(
                "relay distribution reaches degree {} above r = {}",
                self.gamma.max_degree(),
                self.r
            )));
        }
        Ok(())
    }
}

/// Binary erasure channel with its own random stream.
#[derive(Debug, Clone)]
pub struct ErasureChannel {
    pub erasure_prob: f64,
    pub stream_id: u64,
    rng: ChaCha8Rng,
}

impl ErasureChannel {
    pub fn new(erasure_prob: f64, rng: ChaCha8Rng) -> Self {
        let stream_id = rng.get_stream();
        Self {
            erasure_prob,
            stream_id,
            rng,
        }
    }

    /// One channel use. Always draws, so streams stay aligned across modes.
    pub fn erased(&mut self) -> bool {
        self.rng.gen::<f64>() < self.erasure_prob
    }

    pub fn transmit<T>(&mut self, item: T) -> Option<T> {
        if self.erased() {
            None
        } else {
            Some(item)
        }
    }
}

/// Stream for `(seed, trial)` and a purpose id.
pub fn stream_rng(seed: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Stream ids within a trial.
pub mod streams {
    pub const SOURCE: u64 = 0;
    pub const RELAY: u64 = 1;
    pub fn encoder(u: usize) -> u64 {
        0x100 + u as u64
    }
    pub fn uplink(u: usize) -> u64 {
        0x1_0000 + u as u64
    }
    pub fn downlink(u: usize) -> u64 {
        0x2_0000 + u as u64
    }
}

/// Unrecovered-count trace of one user: `(useful bits received, unrecovered)`
/// recorded at start and whenever the count changes.
pub type Trace = Vec<(u32, u32)>;

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub r: usize,
    pub k: usize,
    /// Useful bits received by each user when it finished decoding.
    pub n_r: Vec<Option<u64>>,
    /// Useful bits received by each user when the trial stopped.
    pub useful_received: Vec<u64>,
    pub traces: Vec<Trace>,
    /// Uplink rounds run; each user sent one coded bit per round.
    pub rounds: u64,
    pub broadcast_phases: u64,
    /// Round at which every relay buffer first held a bit (buffered mode).
    pub load_round: Option<u64>,
    /// Bits sent by the busiest user at global success.
    pub n_max: Option<u64>,
    pub success: bool,
}

impl RunMetrics {
    fn foreign_bits(&self) -> f64 {
        ((self.r - 1) * self.k) as f64
    }

    /// Reception overhead of `user` at its decode success.
    pub fn overhead(&self, user: usize) -> Option<f64> {
        self.n_r[user].map(|n| n as f64 / self.foreign_bits())
    }

    /// Mean reception overhead over the users that decoded.
    pub fn mean_overhead(&self) -> Option<f64> {
        let v: Vec<f64> = (0..self.r).filter_map(|u| self.overhead(u)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn transmission_overhead(&self) -> Option<f64> {
        self.n_max.map(|n| n as f64 / self.foreign_bits())
    }

    /// Unrecovered fraction of `user`'s foreign bits once it had received
    /// `overhead * (r-1)K` useful bits. Holds the last value past the end.
    pub fn erasure_at(&self, user: usize, overhead: f64) -> f64 {
        let n = (overhead * self.foreign_bits() + 1e-9).floor().max(0.0) as u64;
        let trace = &self.traces[user];
        let idx = trace.partition_point(|&(m, _)| (m as u64) <= n);
        let unrec = if idx == 0 { trace[0].1 } else { trace[idx - 1].1 };
        unrec as f64 / self.foreign_bits()
    }

    /// Erasure rate averaged over users.
    pub fn mean_erasure_at(&self, overhead: f64) -> f64 {
        (0..self.r).map(|u| self.erasure_at(u, overhead)).sum::<f64>() / self.r as f64
    }

    pub fn erasure_curve(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&e| self.mean_erasure_at(e)).collect()
    }
}

struct Receiver {
    graph: DecodeGraph,
    downlink: ErasureChannel,
    useful: u64,
    trace: Trace,
    done_at: Option<u64>,
}

impl Receiver {
    fn hear(&mut self, bit: Option<&RelayCodedBit>, user: usize, own: &[bool]) -> Result<()> {
        // the channel is used even for empty relay bits to keep streams aligned
        let erased = self.downlink.erased();
        let Some(bit) = bit else { return Ok(()) };
        if erased || self.done_at.is_some() {
            return Ok(());
        }
        let Some(check) = remove_own_bits(bit, user, own) else {
            return Ok(());
        };
        self.useful += 1;
        let before = self.graph.unrecovered();
        self.graph.add_check(check)?;
        self.graph.peel()?;
        let after = self.graph.unrecovered();
        if after != before {
            self.trace.push((self.useful as u32, after as u32));
        }
        if after == 0 {
            self.done_at = Some(self.useful);
        }
        Ok(())
    }
}

/// Runs trial number 0 of `config`.
pub fn run_trial(config: &NetworkConfig) -> Result<RunMetrics> {
    run_trial_indexed(config, 0)
}

/// Runs one trial with streams derived from `(config.seed, trial)`.
pub fn run_trial_indexed(config: &NetworkConfig, trial: u64) -> Result<RunMetrics> {
    config.validate()?;
    let (r, k) = (config.r, config.k);
    let foreign = config.foreign_bits();

    let mut source = stream_rng(config.seed, trial, streams::SOURCE);
    let info: Vec<Vec<bool>> = (0..r).map(|_| (0..k).map(|_| source.gen()).collect()).collect();
    let mut encoders: Vec<ChaCha8Rng> = (0..r)
        .map(|u| stream_rng(config.seed, trial, streams::encoder(u)))
        .collect();
    let mut uplinks: Vec<ErasureChannel> = (0..r)
        .map(|u| ErasureChannel::new(config.eps_up[u], stream_rng(config.seed, trial, streams::uplink(u))))
        .collect();
    let mut receivers: Vec<Receiver> = (0..r)
        .map(|u| Receiver {
            graph: DecodeGraph::new(foreign),
            downlink: ErasureChannel::new(
                config.eps_down[u],
                stream_rng(config.seed, trial, streams::downlink(u)),
            ),
            useful: 0,
            trace: vec![(0, foreign as u32)],
            done_at: None,
        })
        .collect();
    let mut relay_rng = stream_rng(config.seed, trial, streams::RELAY);
    let mut relay = RelayState::new(r);

    let mut rounds = 0u64;
    let mut phases = 0u64;
    let mut load_round = None;
    let mut current: Vec<Option<UserCodedBit>> = vec![None; r];

    let all_done = |rx: &[Receiver]| rx.iter().all(|x| x.done_at.is_some());
    while !all_done(&receivers) && phases < config.max_broadcast_phases {
        rounds += 1;
        for u in 0..r {
            let bit = user_encode(u, &info[u], &config.omega, &mut encoders[u])?;
            current[u] = uplinks[u].transmit(bit);
        }
        match config.relay_mode {
            RelayMode::Buffered => {
                for (u, c) in current.iter_mut().enumerate() {
                    relay.update(u, c.take());
                }
                if !relay.loaded() {
                    continue;
                }
                load_round.get_or_insert(rounds);
                let x = relay.combine(&config.gamma, &mut relay_rng, phases)?;
                phases += 1;
                for (u, rx) in receivers.iter_mut().enumerate() {
                    rx.hear(Some(&x), u, &info[u])?;
                }
            }
            RelayMode::Unbuffered => {
                let x = relay_combine_nobuffer(&current, &config.gamma, &mut relay_rng, phases)?;
                phases += 1;
                for (u, rx) in receivers.iter_mut().enumerate() {
                    rx.hear(x.as_ref(), u, &info[u])?;
                }
            }
            RelayMode::UncodedBroadcast => {
                for c in current.iter_mut() {
                    let Some(bit) = c.take() else { continue };
                    if phases >= config.max_broadcast_phases {
                        break;
                    }
                    let x = RelayCodedBit::forward(&bit, phases);
                    phases += 1;
                    for (u, rx) in receivers.iter_mut().enumerate() {
                        rx.hear(Some(&x), u, &info[u])?;
                    }
                }
            }
        }
    }

    // Erasure channels never flip bits, so whatever was peeled must be right.
    for (u, rx) in receivers.iter().enumerate() {
        for (s, bits) in info.iter().enumerate().filter(|&(s, _)| s != u) {
            for (i, &b) in bits.iter().enumerate() {
                let var = crate::dlt_codec::foreign_var(u, s, i as u32, k) as usize;
                if matches!(rx.graph.value(var), Some(v) if v != b) {
                    return Err(Error::InconsistentDecode { var });
                }
            }
        }
    }

    let success = all_done(&receivers);
    Ok(RunMetrics {
        r,
        k,
        n_r: receivers.iter().map(|x| x.done_at).collect(),
        useful_received: receivers.iter().map(|x| x.useful).collect(),
        traces: receivers.into_iter().map(|x| x.trace).collect(),
        rounds,
        broadcast_phases: phases,
        load_round,
        n_max: success.then_some(rounds),
        success,
    })
}

/// Uncoded relay: users encode with `user_dist`, the relay forwards.
pub fn run_uncoded_baseline(config: &NetworkConfig, user_dist: &DegreeDistribution) -> Result<RunMetrics> {
    run_trial(&uncoded_config(config, user_dist))
}

pub fn uncoded_config(config: &NetworkConfig, user_dist: &DegreeDistribution) -> NetworkConfig {
    NetworkConfig {
        omega: user_dist.clone(),
        relay_mode: RelayMode::UncodedBroadcast,
        ..config.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub mode: RelayMode,
    pub trials: usize,
    pub grid: Vec<f64>,
    pub mean_erasure: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean over decoded users and trials; `None` if nobody decoded.
    pub mean_overhead: Option<f64>,
    /// Mean over successful trials.
    pub mean_tx_overhead: Option<f64>,
    pub success_fraction: f64,
}

struct TrialSummary {
    curve: Vec<f64>,
    overheads: Vec<f64>,
    tx_overhead: Option<f64>,
    success: bool,
}

/// Runs `trials` independent trials in parallel and aggregates them on `grid`.
/// Results do not depend on scheduling.
pub fn run_campaign(config: &NetworkConfig, trials: usize, grid: &[f64]) -> Result<CampaignResult> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    config.validate()?;
    let summaries: Vec<TrialSummary> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let m = run_trial_indexed(config, t)?;
            Ok(TrialSummary {
                curve: m.erasure_curve(grid),
                overheads: (0..m.r).filter_map(|u| m.overhead(u)).collect(),
                tx_overhead: m.transmission_overhead(),
                success: m.success,
            })
        })
        .collect::<Result<_>>()?;

    let n = trials as f64;
    let mut mean_erasure = vec![0.0; grid.len()];
    let mut stderr = vec![0.0; grid.len()];
    for (i, (m, s)) in mean_erasure.iter_mut().zip(stderr.iter_mut()).enumerate() {
        let mean = summaries.iter().map(|t| t.curve[i]).sum::<f64>() / n;
        *m = mean;
        if trials > 1 {
            let var = summaries.iter().map(|t| (t.curve[i] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            *s = (var / n).sqrt();
        }
    }
    let overheads: Vec<f64> = summaries.iter().flat_map(|t| t.overheads.iter().copied()).collect();
    let tx: Vec<f64> = summaries.iter().filter_map(|t| t.tx_overhead).collect();
    let mean_of = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    Ok(CampaignResult {
        mode: config.relay_mode,
        trials,
        grid: grid.to_vec(),
        mean_erasure,
        stderr,
        mean_overhead: mean_of(&overheads),
        mean_tx_overhead: mean_of(&tx),
        success_fraction: summaries.iter().filter(|t| t.success).count() as f64 / n,
    })
}

impl CampaignResult {
    /// Mean erasure rate at the grid point closest to `overhead`.
    pub fn erasure_near(&self, overhead: f64) -> (f64, f64) {
        let i = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - overhead).abs().total_cmp(&(b.1 - overhead).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        (self.mean_erasure[i], self.stderr[i])
    }

    /// First grid overhead where the mean erasure rate is at or below `level`.
    pub fn overhead_reaching(&self, level: f64) -> Option<f64> {
        self.grid
            .iter()
            .zip(&self.mean_erasure)
            .find(|(_, &p)| p <= level)
            .map(|(&e, _)| e)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "overhead,mean_erasure_rate,stderr,trials")?;
        for ((e, m), s) in self.grid.iter().zip(&self.mean_erasure).zip(&self.stderr) {
            writeln!(out, "{e:.6},{m:.10e},{s:.10e},{}", self.trials)?;
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.6}"));
        writeln!(out, "mode={}", self.mode)?;
        writeln!(out, "trials={}", self.trials)?;
        writeln!(out, "success_fraction={:.6}", self.success_fraction)?;
        writeln!(out, "mean_overhead={}", opt(self.mean_overhead))?;
        writeln!(out, "mean_transmission_overhead={}", opt(self.mean_tx_overhead))?;
        Ok(())
    }
}
