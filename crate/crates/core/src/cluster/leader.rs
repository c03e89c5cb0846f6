use serde::{Deserialize, Serialize};

use crate::domain::{AgentId, GlobalMemory, Roster, Task};

use super::capability::relevance;

/// Weights of consensus success, expertise match and availability in the
/// leader score.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeaderWeights {
    pub success: f64,
    pub expertise: f64,
    pub availability: f64,
}

impl Default for LeaderWeights {
    fn default() -> Self {
        Self {
            success: 1.0 / 3.0,
            expertise: 1.0 / 3.0,
            availability: 1.0 / 3.0,
        }
    }
}

impl LeaderWeights {
    pub fn sum(&self) -> f64 {
        self.success + self.expertise + self.availability
    }
}

pub fn leader_score(
    agent: AgentId,
    roster: &Roster,
    memory: &GlobalMemory,
    task: &Task,
    weights: &LeaderWeights,
) -> f64 {
    let profile = roster.get(agent).expect("member is in the roster");
    weights.success * memory.consensus_success(agent)
        + weights.expertise * relevance(&profile.expertise, &task.required_expertise)
        + weights.availability * profile.availability
}

/// Highest-scoring member; ties go to the lowest id.
pub fn select_leader(
    members: &[AgentId],
    roster: &Roster,
    memory: &GlobalMemory,
    task: &Task,
    weights: &LeaderWeights,
) -> AgentId {
    assert!(!members.is_empty(), "cannot elect a leader of an empty cluster");
    let mut sorted = members.to_vec();
    sorted.sort();
    let mut best = (sorted[0], f64::NEG_INFINITY);
    for id in sorted {
        let score = leader_score(id, roster, memory, task, weights);
        if score > best.1 {
            best = (id, score);
        }
    }
    best.0
}
