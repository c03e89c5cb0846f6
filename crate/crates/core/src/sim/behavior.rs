use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::population::{AgentSpec, AgentStatus};
use super::scenario::TaskCase;
use crate::domain::{AgentId, Candidate, Proposal, Task};
use crate::error::{HacnError, Result};
use crate::math::{mix_seed, unit_similarity};
use crate::tier1::{AgentBehavior, Tally};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentModel {
    /// Softmax sharpness of candidate selection.
    pub beta_sel: f64,
    /// Standard deviation of the noise added to reliability to get confidence.
    pub confidence_noise: f64,
    /// Adversarial confidence is drawn from `[adversarial_confidence, 1]`.
    pub adversarial_confidence: f64,
}

impl Default for AgentModel {
    fn default() -> Self {
        Self {
            beta_sel: 5.0,
            confidence_noise: 0.1,
            adversarial_confidence: 0.7,
        }
    }
}

fn draw_confidence(agent: &AgentSpec, model: &AgentModel, rng: &mut impl Rng) -> f64 {
    match agent.status {
        AgentStatus::Adversarial => rng.random_range(model.adversarial_confidence..=1.0),
        _ => {
            let noise = if model.confidence_noise > 0.0 {
                Normal::new(0.0, model.confidence_noise)
                    .expect("validated noise")
                    .sample(rng)
            } else {
                0.0
            };
            (agent.reliability + noise).clamp(0.0, 1.0)
        }
    }
}

/// Selection probabilities of an active agent over `candidates`:
/// `∝ exp(beta_sel · reliability · relevance · quality_j)`.
pub(crate) fn selection_weights(
    agent: &AgentSpec,
    task: &Task,
    qualities: &[f64],
    model: &AgentModel,
) -> Vec<f64> {
    let relevance = unit_similarity(&agent.profile.expertise, &task.required_expertise);
    let scale = model.beta_sel * agent.reliability * relevance;
    let logits: Vec<f64> = qualities.iter().map(|q| scale * q).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let mut u: f64 = rng.random();
    for (i, p) in probs.iter().enumerate() {
        if u < *p {
            return i;
        }
        u -= p;
    }
    probs.len() - 1
}

/// One agent's initial pick. `qualities` is aligned with `candidates`.
pub fn propose(
    agent: &AgentSpec,
    task: &Task,
    candidates: &[Candidate],
    qualities: &[f64],
    model: &AgentModel,
    rng: &mut impl Rng,
) -> Result<Proposal> {
    if candidates.is_empty() {
        return Err(HacnError::NoCandidates);
    }
    if qualities.len() != candidates.len() {
        return Err(HacnError::InvalidInput(
            "one latent quality per candidate expected".into(),
        ));
    }
    let candidate = match agent.status {
        AgentStatus::Failed => {
            return Err(HacnError::InvalidInput(format!(
                "failed agent {} cannot propose",
                agent.id()
            )))
        }
        AgentStatus::Adversarial => candidates.choose(rng).expect("nonempty").id,
        AgentStatus::Active => {
            let probs = selection_weights(agent, task, qualities, model);
            candidates[sample_index(&probs, rng)].id
        }
    };
    Ok(Proposal {
        candidate,
        confidence: draw_confidence(agent, model, rng),
    })
}

/// Reconsider a proposal after seeing the weighted tally.
///
/// An active agent moves to the tally leader with probability
/// `(1 - reliability) × leader_share`. Adversarial agents ignore the tally and
/// pick a fresh random candidate every round.
pub fn revise(
    agent: &AgentSpec,
    current: Proposal,
    tally: &Tally,
    candidates: &[Candidate],
    model: &AgentModel,
    rng: &mut impl Rng,
) -> Proposal {
    let candidate = match agent.status {
        AgentStatus::Adversarial if !candidates.is_empty() => {
            candidates.choose(rng).expect("nonempty").id
        }
        _ => match tally.leader() {
            Some((leader, share)) => {
                let p = ((1.0 - agent.reliability) * share).clamp(0.0, 1.0);
                if rng.random_bool(p) {
                    leader
                } else {
                    current.candidate
                }
            }
            None => current.candidate,
        },
    };
    Proposal {
        candidate,
        confidence: draw_confidence(agent, model, rng),
    }
}

/// Drives a simulated population through the protocol. Each agent owns its
/// own random stream, so the order in which clusters are polled does not
/// change any agent's behaviour.
#[derive(Clone, Debug)]
pub struct SimulatedAgents {
    model: AgentModel,
    agents: Vec<AgentSpec>,
    streams: Vec<ChaCha8Rng>,
    qualities: Vec<f64>,
}

impl SimulatedAgents {
    pub fn new(population: &[AgentSpec], model: AgentModel, seed: u64) -> Self {
        let mut agents = population.to_vec();
        agents.sort_by_key(|a| a.id());
        let streams = agents
            .iter()
            .map(|a| ChaCha8Rng::seed_from_u64(mix_seed(seed, u64::from(a.id().0))))
            .collect();
        Self {
            model,
            agents,
            streams,
            qualities: Vec::new(),
        }
    }

    /// Load the latent candidate qualities of the task about to be decided.
    pub fn set_case(&mut self, case: &TaskCase) {
        self.qualities = case.qualities.clone();
    }

    fn slot(&self, id: AgentId) -> usize {
        self.agents
            .binary_search_by_key(&id, |a| a.id())
            .unwrap_or_else(|_| panic!("unknown agent {id}"))
    }
}

impl AgentBehavior for SimulatedAgents {
    fn propose(&mut self, agent: AgentId, task: &Task, candidates: &[Candidate]) -> Proposal {
        let i = self.slot(agent);
        propose(
            &self.agents[i],
            task,
            candidates,
            &self.qualities,
            &self.model,
            &mut self.streams[i],
        )
        .unwrap_or_else(|e| panic!("simulated proposal failed: {e}"))
    }

    fn revise(
        &mut self,
        agent: AgentId,
        current: Proposal,
        tally: &Tally,
        _task: &Task,
        candidates: &[Candidate],
    ) -> Proposal {
        let i = self.slot(agent);
        revise(
            &self.agents[i],
            current,
            tally,
            candidates,
            &self.model,
            &mut self.streams[i],
        )
    }
}

/// Scripted voters for checking the convergence bound: at the start of every
/// voting iteration a coin with bias `p` decides whether all members back the
/// first candidate; otherwise each member backs a different candidate. The
/// tally is ignored (no revision).
#[derive(Clone, Debug)]
pub struct ForcedAgreement {
    p: f64,
    rng: ChaCha8Rng,
    unanimous: bool,
    slot: usize,
}

impl ForcedAgreement {
    pub fn new(p: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&p), "p must lie in [0, 1]");
        Self {
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
            unanimous: false,
            slot: 0,
        }
    }

    fn pick(&mut self, candidates: &[Candidate]) -> Proposal {
        let idx = if self.unanimous {
            0
        } else {
            let s = self.slot % candidates.len();
            self.slot += 1;
            s
        };
        Proposal {
            candidate: candidates[idx].id,
            confidence: 1.0,
        }
    }
}

impl AgentBehavior for ForcedAgreement {
    fn begin_iteration(&mut self, _iteration: u32) {
        self.unanimous = self.rng.random_bool(self.p);
        self.slot = 0;
    }

    fn propose(&mut self, _agent: AgentId, _task: &Task, candidates: &[Candidate]) -> Proposal {
        self.pick(candidates)
    }

    fn revise(
        &mut self,
        _agent: AgentId,
        _current: Proposal,
        _tally: &Tally,
        _task: &Task,
        candidates: &[Candidate],
    ) -> Proposal {
        self.pick(candidates)
    }
}
