//! Protocol-visible domain types.
//!
//! Nothing in this module carries simulator-private information: latent agent
//! reliability, candidate quality and the ground-truth answer of a task live
//! in [`crate::sim`] and never reach the tier engines.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{HacnError, Result};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(AgentId, "a");
id_type!(CandidateId, "s");
id_type!(TaskId, "t");
id_type!(ClusterId, "c");

/// What the protocol knows about an agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub id: AgentId,
    /// Expertise per domain, each in `[0, 1]`.
    pub expertise: Vec<f64>,
    /// Tracked historical accuracy at population creation. Once the global
    /// memory holds a value for the agent, that value takes precedence.
    pub history: f64,
    pub availability: f64,
    /// False for agents that dropped out; they neither send nor vote.
    pub online: bool,
}

/// Id-indexed view over the protocol-visible population.
#[derive(Clone, Debug, Default)]
pub struct Roster {
    agents: Vec<AgentProfile>,
}

impl Roster {
    pub fn new(mut agents: Vec<AgentProfile>) -> Self {
        agents.sort_by_key(|a| a.id);
        Self { agents }
    }

    pub fn get(&self, id: AgentId) -> Option<&AgentProfile> {
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.agents[i])
    }

    pub fn agents(&self) -> &[AgentProfile] {
        &self.agents
    }

    pub fn online(&self) -> impl Iterator<Item = &AgentProfile> {
        self.agents.iter().filter(|a| a.online)
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub required_expertise: Vec<f64>,
    pub complexity: f64,
    /// Time limit τ in virtual ticks.
    pub deadline: u64,
    pub resource_budget: f64,
}

impl Task {
    pub fn new(
        id: TaskId,
        required_expertise: Vec<f64>,
        complexity: f64,
        deadline: u64,
        resource_budget: f64,
    ) -> Result<Self> {
        if deadline < 1 {
            return Err(HacnError::InvalidInput("task deadline must be >= 1 tick".into()));
        }
        if !(resource_budget >= 0.0) {
            return Err(HacnError::InvalidInput("resource budget must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&complexity) {
            return Err(HacnError::InvalidInput("complexity must lie in [0, 1]".into()));
        }
        Ok(Self {
            id,
            required_expertise,
            complexity,
            deadline,
            resource_budget,
        })
    }
}

/// One entry of the discrete solution space of a task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: CandidateId,
    pub feature: Vec<f64>,
    pub cost: f64,
}

pub fn find_candidate(candidates: &[Candidate], id: CandidateId) -> Option<&Candidate> {
    candidates.iter().find(|c| c.id == id)
}

/// An agent's pick together with its stated confidence.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub candidate: CandidateId,
    pub confidence: f64,
}

/// A confidence-weighted ballot. The weight is always `confidence × history`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Vote {
    agent: AgentId,
    candidate: CandidateId,
    confidence: f64,
    weight: f64,
}

impl Vote {
    pub fn cast(agent: AgentId, proposal: Proposal, history: f64) -> Self {
        Self {
            agent,
            candidate: proposal.candidate,
            confidence: proposal.confidence,
            weight: crate::tier1::vote_weight(proposal.confidence, history),
        }
    }

    pub fn agent(&self) -> AgentId {
        self.agent
    }

    pub fn candidate(&self) -> CandidateId {
        self.candidate
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Output of a cluster's local vote.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSolution {
    pub cluster: ClusterId,
    pub candidate: CandidateId,
    /// Winning share of the total vote weight, `cs_str`.
    pub strength: f64,
    pub member_count: usize,
    /// True when the cluster did not reach its threshold and is handing its
    /// best-so-far leader up the hierarchy.
    pub escalated: bool,
}

impl ClusterSolution {
    /// `cs_str × |members|`, the weight a cluster carries in later tiers.
    pub fn backing(&self) -> f64 {
        self.strength * self.member_count as f64
    }
}

/// Which stage of the hierarchy produced the final decision.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscalationPath {
    /// Every cluster accepted the same candidate locally.
    LocalAcceptance,
    /// A clear majority of cluster backing agreed before any debate.
    PartialConsensus,
    /// Debate plus similarity grouping and feasibility-scored selection.
    Arbitration,
    /// No candidate was feasible; weighted majority of cluster solutions.
    Fallback,
    /// Fully-connected baseline; no hierarchy involved.
    FullMesh,
}

impl fmt::Display for EscalationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::LocalAcceptance => "local_acceptance",
            Self::PartialConsensus => "partial_consensus",
            Self::Arbitration => "arbitration",
            Self::Fallback => "fallback",
            Self::FullMesh => "full_mesh",
        };
        f.write_str(s)
    }
}

/// A cluster solution together with the agents that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub solution: ClusterSolution,
    pub members: Vec<AgentId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsensusRecord {
    pub task: TaskId,
    pub clusters: Vec<ClusterReport>,
    pub decision: CandidateId,
    pub path: EscalationPath,
    /// Dissenting cluster solutions kept when a partial consensus was accepted.
    pub minority: Vec<ClusterSolution>,
    pub timestamp: u64,
}

/// A past final decision, with enough context to compare later tasks and
/// solutions against it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorDecision {
    pub task: TaskId,
    pub requirement: Vec<f64>,
    pub candidate: CandidateId,
    pub feature: Vec<f64>,
}

/// Orchestrator state: consensus history (`ch`), agent metrics (`am`) and
/// prior decisions (`pd`).
#[derive(Clone, Debug, Default)]
pub struct GlobalMemory {
    ch: Vec<ConsensusRecord>,
    am: BTreeMap<AgentId, f64>,
    pd: Vec<PriorDecision>,
    // (cluster decisions matching the final decision, cluster decisions)
    agreement: BTreeMap<AgentId, (u32, u32)>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MemoryLine<'a> {
    Ch(&'a ConsensusRecord),
    Am { agent: AgentId, history: f64 },
    Pd(&'a PriorDecision),
}

impl GlobalMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn history(&self) -> &[ConsensusRecord] {
        &self.ch
    }

    pub fn agent_metrics(&self) -> &BTreeMap<AgentId, f64> {
        &self.am
    }

    pub fn prior_decisions(&self) -> &[PriorDecision] {
        &self.pd
    }

    /// Historical accuracy `h` used for vote weights and capability vectors.
    pub fn accuracy_of(&self, agent: &AgentProfile) -> f64 {
        self.am.get(&agent.id).copied().unwrap_or(agent.history)
    }

    /// Fraction of the agent's past cluster decisions that matched the final
    /// decision; 0.5 before the agent has any history.
    pub fn consensus_success(&self, agent: AgentId) -> f64 {
        match self.agreement.get(&agent) {
            Some(&(hit, total)) if total > 0 => f64::from(hit) / f64::from(total),
            _ => 0.5,
        }
    }

    /// Append a completed consensus. `ch` is append-only.
    pub fn record(&mut self, record: ConsensusRecord) {
        for report in &record.clusters {
            let hit = u32::from(report.solution.candidate == record.decision);
            for agent in &report.members {
                let e = self.agreement.entry(*agent).or_insert((0, 0));
                e.0 += hit;
                e.1 += 1;
            }
        }
        self.ch.push(record);
    }

    pub fn push_prior(&mut self, prior: PriorDecision) {
        self.pd.push(prior);
    }

    /// Merge updated agent metrics; values are clamped into `[0, 1]`.
    pub fn merge_metrics(&mut self, metrics: &BTreeMap<AgentId, f64>) {
        for (agent, h) in metrics {
            self.am.insert(*agent, h.clamp(0.0, 1.0));
        }
    }

    /// Line-delimited JSON dump of `ch`, `am` and `pd`.
    pub fn export_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        let lines = self
            .ch
            .iter()
            .map(MemoryLine::Ch)
            .chain(self.am.iter().map(|(agent, history)| MemoryLine::Am {
                agent: *agent,
                history: *history,
            }))
            .chain(self.pd.iter().map(MemoryLine::Pd));
        for line in lines {
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}
