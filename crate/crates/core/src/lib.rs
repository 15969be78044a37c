//! Distributed LT codes for the erasure multi-way relay channel.
//!
//! `r` users exchange `K` information bits each through a single relay over
//! binary erasure links. Users send LT-coded bits on the uplink; the relay
//! XORs a random subset of them according to its check-node distribution
//! `Gamma` and broadcasts the result. Each user strips its own contribution
//! and peels the remaining graph.
//!
//! * [`degree_dist`]: distributions and node/edge/decoder-side transforms.
//! * [`density_evolution`]: asymptotic erasure analysis.
//! * [`lp_design`]: LP-based design of `Gamma`.
//! * [`dlt_codec`]: user encoder, relay combiner, own-bit removal, peeling.
//! * [`emr_sim`]: Monte Carlo simulation of the full protocol.
//! * [`cli`]: the `emr-dlt` command-line front end.

pub mod cli;
pub mod degree_dist;
pub mod density_evolution;
pub mod dlt_codec;
pub mod emr_sim;
pub mod error;
pub mod lp_design;

pub use degree_dist::{DegreeDistribution, Perspective};
pub use error::{Error, Result};
