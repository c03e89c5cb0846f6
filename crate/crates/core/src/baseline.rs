//! Fully-connected baseline: every online agent votes with every other one,
//! using the same weighting, threshold and revision rules as tier 1. Each
//! round costs `n(n-1)` messages.

use serde::{Deserialize, Serialize};

use crate::clock::{ClockCosts, MessageCounts, Network, Tier};
use crate::domain::{AgentProfile, Candidate, CandidateId, GlobalMemory, Roster, Task};
use crate::error::{HacnError, Result};
use crate::tier1::{iterate_votes, AgentBehavior, VotingParams};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineParams {
    pub voting: VotingParams,
    pub costs: ClockCosts,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineOutcome {
    pub decision: CandidateId,
    pub converged: bool,
    pub rounds: u32,
    pub share: f64,
    pub messages: MessageCounts,
    pub ticks: u64,
    pub voters: usize,
}

/// Vote over the whole online population. If the threshold is never met the
/// plurality of the last round decides.
///
/// # Errors
///
/// [`HacnError::TooFewActive`] with fewer than two online agents and
/// [`HacnError::NoCandidates`] on an empty candidate list.
pub fn baseline_consensus<B: AgentBehavior + ?Sized>(
    roster: &Roster,
    task: &Task,
    candidates: &[Candidate],
    params: &BaselineParams,
    behavior: &mut B,
) -> Result<BaselineOutcome> {
    let voters: Vec<&AgentProfile> = roster.online().collect();
    if voters.len() < 2 {
        return Err(HacnError::TooFewActive {
            needed: 2,
            found: voters.len(),
        });
    }
    let mut net = Network::new(params.costs);
    let voting = VotingParams {
        time_budget: None,
        ..params.voting
    };
    // profile histories only: the baseline keeps no memory between tasks
    let memory = GlobalMemory::new();
    let out = iterate_votes(
        &voters,
        task,
        candidates,
        &memory,
        &voting,
        behavior,
        &mut net,
        Tier::Baseline,
    )?;
    Ok(BaselineOutcome {
        decision: if out.accepted { out.candidate } else { out.last_leader },
        converged: out.accepted,
        rounds: out.iterations,
        share: out.share,
        messages: net.bus.snapshot(),
        ticks: net.clock.now(),
        voters: voters.len(),
    })
}
