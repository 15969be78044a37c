//! Bit-level encoding, relay combining and peeling decoding.
//!
//! Users are indexed `0..r`. Information-bit indices are local to their
//! source user, so contributions of different users never cancel.

use rand::Rng;

use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};

/// An LT-coded bit produced by one user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserCodedBit {
    pub source_user: usize,
    /// Distinct information-bit indices in `0..K`.
    pub info_indices: Vec<u32>,
    pub value: bool,
}

/// One user's share of a relay-coded bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contribution {
    pub user: usize,
    pub info_indices: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayCodedBit {
    pub contributions: Vec<Contribution>,
    pub value: bool,
    pub phase_index: u64,
}

impl RelayCodedBit {
    /// Number of distinct users combined.
    pub fn degree(&self) -> usize {
        self.contributions.len()
    }

    /// Forwards a single user bit unchanged.
    pub fn forward(bit: &UserCodedBit, phase_index: u64) -> Self {
        Self {
            contributions: vec![Contribution {
                user: bit.source_user,
                info_indices: bit.info_indices.clone(),
            }],
            value: bit.value,
            phase_index,
        }
    }
}

/// Picks `d` distinct indices out of `0..n` uniformly (partial Fisher-Yates).
pub fn select_distinct<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<usize> {
    assert!(d <= n, "cannot select {d} of {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..d {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(d);
    pool
}

/// Samples a degree from `omega`, picks that many distinct information bits
/// of `user` and returns their XOR together with its provenance.
pub fn user_encode<R: Rng + ?Sized>(
    user: usize,
    info_bits: &[bool],
    omega: &DegreeDistribution,
    rng: &mut R,
) -> Result<UserCodedBit> {
    let degree = omega.sample(rng);
    if degree > info_bits.len() {
        return Err(Error::Domain(format!(
            "sampled degree {degree} exceeds K = {}",
            info_bits.len()
        )));
    }
    let info_indices: Vec<u32> = if degree == 1 {
        vec![rng.gen_range(0..info_bits.len()) as u32]
    } else {
        select_sparse(info_bits.len(), degree, rng)
    };
    let value = info_indices
        .iter()
        .fold(false, |acc, &i| acc ^ info_bits[i as usize]);
    Ok(UserCodedBit {
        source_user: user,
        info_indices,
        value,
    })
}

/// Distinct uniform indices by rejection; cheap when `d` is small against `n`.
fn select_sparse<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<u32> {
    if 2 * d > n {
        return select_distinct(n, d, rng).into_iter().map(|i| i as u32).collect();
    }
    let mut out: Vec<u32> = Vec::with_capacity(d);
    while out.len() < d {
        let i = rng.gen_range(0..n) as u32;
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// One-bit buffers at the relay, one per uplink.
#[derive(Debug, Clone)]
pub struct RelayState {
    buffers: Vec<Option<UserCodedBit>>,
    filled: usize,
}

impl RelayState {
    pub fn new(users: usize) -> Self {
        Self {
            buffers: vec![None; users],
            filled: 0,
        }
    }

    pub fn users(&self) -> usize {
        self.buffers.len()
    }

    /// True once every buffer holds a bit.
    pub fn loaded(&self) -> bool {
        self.filled == self.buffers.len()
    }

    pub fn buffer(&self, user: usize) -> Option<&UserCodedBit> {
        self.buffers[user].as_ref()
    }

    /// Overwrites buffer `user` with a received bit; an erasure leaves it as is.
    pub fn update(&mut self, user: usize, received: Option<UserCodedBit>) {
        if let Some(bit) = received {
            if self.buffers[user].is_none() {
                self.filled += 1;
            }
            self.buffers[user] = Some(bit);
        }
    }

    /// XOR of `d ~ gamma` buffered bits from distinct users chosen uniformly.
    pub fn combine<R: Rng + ?Sized>(
        &self,
        gamma: &DegreeDistribution,
        rng: &mut R,
        phase: u64,
    ) -> Result<RelayCodedBit> {
        if !self.loaded() {
            return Err(Error::Protocol(format!(
                "broadcast requested with {} of {} buffers loaded",
                self.filled,
                self.buffers.len()
            )));
        }
        let selected = sample_users(self.users(), gamma, rng)?;
        let mut value = false;
        let contributions = selected
            .into_iter()
            .map(|u| {
                let bit = self.buffers[u].as_ref().expect("loaded");
                value ^= bit.value;
                Contribution {
                    user: u,
                    info_indices: bit.info_indices.clone(),
                }
            })
            .collect();
        Ok(RelayCodedBit {
            contributions,
            value,
            phase_index: phase,
        })
    }
}

fn sample_users<R: Rng + ?Sized>(
    users: usize,
    gamma: &DegreeDistribution,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let d = gamma.sample(rng);
    if d > users {
        return Err(Error::Constraint(format!(
            "relay degree {d} exceeds user count {users}"
        )));
    }
    Ok(select_distinct(users, d, rng))
}

/// Buffered relay: store the uplink bit (if any) for `user`.
pub fn relay_update_buffer(state: &mut RelayState, user: usize, received: Option<UserCodedBit>) {
    state.update(user, received);
}

pub fn relay_combine<R: Rng + ?Sized>(
    state: &RelayState,
    gamma: &DegreeDistribution,
    rng: &mut R,
    phase: u64,
) -> Result<RelayCodedBit> {
    state.combine(gamma, rng, phase)
}

/// Combining without buffers: selected users whose current uplink bit was
/// erased simply drop out of the XOR. `None` when nothing survives.
pub fn relay_combine_nobuffer<R: Rng + ?Sized>(
    current_uplink: &[Option<UserCodedBit>],
    gamma: &DegreeDistribution,
    rng: &mut R,
    phase: u64,
) -> Result<Option<RelayCodedBit>> {
    let selected = sample_users(current_uplink.len(), gamma, rng)?;
    let mut value = false;
    let contributions: Vec<Contribution> = selected
        .into_iter()
        .filter_map(|u| {
            current_uplink[u].as_ref().map(|bit| {
                value ^= bit.value;
                Contribution {
                    user: u,
                    info_indices: bit.info_indices.clone(),
                }
            })
        })
        .collect();
    if contributions.is_empty() {
        return Ok(None);
    }
    Ok(Some(RelayCodedBit {
        contributions,
        value,
        phase_index: phase,
    }))
}

/// A check node over one user's foreign variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckNode {
    pub value: bool,
    pub vars: Vec<u32>,
}

/// Index of foreign bit `(source, info)` in the decoding graph of `user`:
/// sources other than `user` are packed in order, `k` bits each.
pub fn foreign_var(user: usize, source: usize, info: u32, k: usize) -> u32 {
    debug_assert_ne!(user, source);
    let block = if source < user { source } else { source - 1 };
    (block * k) as u32 + info
}

/// Strips the contribution of `user` from `bit` using its own information
/// bits. Returns `None` when no foreign contribution remains.
pub fn remove_own_bits(bit: &RelayCodedBit, user: usize, own_info: &[bool]) -> Option<CheckNode> {
    let k = own_info.len();
    let mut value = bit.value;
    let mut vars = Vec::new();
    for c in &bit.contributions {
        if c.user == user {
            for &i in &c.info_indices {
                value ^= own_info[i as usize];
            }
        } else {
            vars.extend(c.info_indices.iter().map(|&i| foreign_var(user, c.user, i, k)));
        }
    }
    if vars.is_empty() {
        None
    } else {
        Some(CheckNode { value, vars })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeelStatus {
    pub recovered: usize,
    pub num_vars: usize,
}

impl PeelStatus {
    pub fn complete(&self) -> bool {
        self.recovered == self.num_vars
    }
}

/// Incremental peeling decoder. Checks can be added at any time; each call
/// to [`DecodeGraph::peel`] resolves every degree-1 check reachable so far.
#[derive(Debug, Clone)]
pub struct DecodeGraph {
    values: Vec<Option<bool>>,
    /// Checks with their still-unknown neighbours and residual values.
    checks: Vec<CheckNode>,
    /// For each unknown variable, the checks that reference it.
    adjacency: Vec<Vec<u32>>,
    ripple: Vec<u32>,
    recovered: usize,
}

impl DecodeGraph {
    pub fn new(num_vars: usize) -> Self {
        Self {
            values: vec![None; num_vars],
            checks: Vec::new(),
            adjacency: vec![Vec::new(); num_vars],
            ripple: Vec::new(),
            recovered: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn recovered(&self) -> usize {
        self.recovered
    }

    pub fn unrecovered(&self) -> usize {
        self.values.len() - self.recovered
    }

    pub fn is_complete(&self) -> bool {
        self.recovered == self.values.len()
    }

    pub fn value(&self, var: usize) -> Option<bool> {
        self.values[var]
    }

    pub fn values(&self) -> &[Option<bool>] {
        &self.values
    }

    pub fn status(&self) -> PeelStatus {
        PeelStatus {
            recovered: self.recovered,
            num_vars: self.values.len(),
        }
    }

    /// Adds a check, substituting already-known variables. Checks that end
    /// up with no unknown neighbour are dropped.
    pub fn add_check(&mut self, check: CheckNode) -> Result<()> {
        let mut value = check.value;
        let mut vars = Vec::with_capacity(check.vars.len());
        for v in check.vars {
            let Some(slot) = self.values.get(v as usize) else {
                return Err(Error::Domain(format!("variable {v} out of range")));
            };
            match slot {
                Some(known) => value ^= known,
                None => vars.push(v),
            }
        }
        if vars.is_empty() {
            return Ok(());
        }
        let id = self.checks.len() as u32;
        if vars.len() == 1 {
            self.ripple.push(id);
        }
        for &v in &vars {
            self.adjacency[v as usize].push(id);
        }
        self.checks.push(CheckNode { value, vars });
        Ok(())
    }

    /// Peels with LIFO order on the ripple.
    pub fn peel(&mut self) -> Result<PeelStatus> {
        while let Some(id) = self.ripple.pop() {
            self.resolve(id)?;
        }
        Ok(self.status())
    }

    /// Peels taking ripple entries in random order.
    pub fn peel_randomized<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PeelStatus> {
        while !self.ripple.is_empty() {
            let i = rng.gen_range(0..self.ripple.len());
            let id = self.ripple.swap_remove(i);
            self.resolve(id)?;
        }
        Ok(self.status())
    }

    fn resolve(&mut self, id: u32) -> Result<()> {
        let check = &self.checks[id as usize];
        if check.vars.len() != 1 {
            return Ok(());
        }
        let var = check.vars[0] as usize;
        let value = check.value;
        if let Some(known) = self.values[var] {
            if known != value {
                return Err(Error::InconsistentDecode { var });
            }
            return Ok(());
        }
        self.values[var] = Some(value);
        self.recovered += 1;
        for cid in std::mem::take(&mut self.adjacency[var]) {
            let c = &mut self.checks[cid as usize];
            if let Some(pos) = c.vars.iter().position(|&v| v as usize == var) {
                c.vars.swap_remove(pos);
                c.value ^= value;
                match c.vars.len() {
                    1 => self.ripple.push(cid),
                    0 if c.value => return Err(Error::InconsistentDecode { var }),
                    _ => {}
                }
            }
        }
        Ok(())
    }
}
