//! Hierarchical adaptive consensus for multi-agent systems.
//!
//! Agents are grouped into small capability clusters that vote locally
//! (tier 1), cluster leaders debate as representatives (tier 2), and a global
//! arbiter groups the surviving solutions by similarity, validates them and
//! picks a final decision with a weighted-majority fallback (tier 3).
//!
//! The crate also ships the synthetic agent model used to drive the protocol,
//! a fully-connected baseline that uses the same voting rules over the whole
//! population, and a seeded experiment harness that reports message counts,
//! virtual-clock convergence time, cluster statistics and decision accuracy.
//!
//! Everything is deterministic given a configuration and a seed. Time is a
//! virtual tick counter ([`clock::VirtualClock`]); communication is counted
//! per tier on a [`clock::MessageBus`].

// `!(x >= 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod clock;
pub mod cluster;
pub mod domain;
pub mod error;
pub mod harness;
pub mod math;
pub mod metrics;
pub mod protocol;
pub mod sim;
pub mod tier1;
pub mod tier2;
pub mod tier3;

pub use clock::{ClockCosts, MessageBus, Network, Tier, VirtualClock};
pub use domain::{
    AgentId, AgentProfile, Candidate, CandidateId, ClusterId, ClusterSolution, EscalationPath,
    GlobalMemory, Proposal, Roster, Task, TaskId, Vote,
};
pub use error::{HacnError, Result};
