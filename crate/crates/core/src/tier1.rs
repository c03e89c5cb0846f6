//! Tier 1: confidence-weighted iterative voting inside a cluster.
//!
//! Every member broadcasts its ballot to every other member, so one iteration
//! of a cluster of `m` active agents costs `m(m-1)` tier-1 messages. Ballots
//! weigh `confidence × history`. The acceptance threshold starts from the
//! entropy of the first round of proposals and decays by 5% after every
//! failed iteration, never dropping below one half.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clock::{ClockEvent, Network, Tier};
use crate::cluster::Cluster;
use crate::domain::{
    AgentId, AgentProfile, Candidate, CandidateId, ClusterSolution, GlobalMemory, Proposal, Roster,
    Task, Vote,
};
use crate::error::{HacnError, Result};
use crate::math::entropy;

/// How the protocol obtains proposals from agents.
///
/// Engines only ever talk to agents through this trait; they never see the
/// simulator's latent state.
pub trait AgentBehavior {
    /// Called once at the start of every voting iteration, before any member
    /// of the voting group is polled.
    fn begin_iteration(&mut self, _iteration: u32) {}

    fn propose(&mut self, agent: AgentId, task: &Task, candidates: &[Candidate]) -> Proposal;

    fn revise(
        &mut self,
        agent: AgentId,
        current: Proposal,
        tally: &Tally,
        task: &Task,
        candidates: &[Candidate],
    ) -> Proposal;
}

pub const DEFAULT_DECAY: f64 = 0.95;
pub const DEFAULT_FLOOR: f64 = 0.5;

/// Normalised weight shares per candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct Tally {
    shares: BTreeMap<CandidateId, f64>,
    total_weight: f64,
}

impl Tally {
    /// Build a tally directly from shares. Used by scripted voters and tests.
    pub fn from_shares(shares: BTreeMap<CandidateId, f64>) -> Self {
        Self {
            shares,
            total_weight: 1.0,
        }
    }

    pub fn shares(&self) -> &BTreeMap<CandidateId, f64> {
        &self.shares
    }

    pub fn share(&self, candidate: CandidateId) -> f64 {
        self.shares.get(&candidate).copied().unwrap_or(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Candidate with the largest share; ties go to the lowest id.
    pub fn leader(&self) -> Option<(CandidateId, f64)> {
        let mut best: Option<(CandidateId, f64)> = None;
        for (&c, &s) in &self.shares {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((c, s));
            }
        }
        best
    }
}

pub fn vote_weight(confidence: f64, history: f64) -> f64 {
    confidence * history
}

/// Weight share of each candidate. Fails with [`HacnError::ZeroWeight`] when
/// no ballot carries weight.
pub fn tally(votes: &[Vote]) -> Result<Tally> {
    let mut sums: BTreeMap<CandidateId, f64> = BTreeMap::new();
    let mut total = 0.0;
    for v in votes {
        *sums.entry(v.candidate()).or_default() += v.weight();
        total += v.weight();
    }
    if !(total > 0.0) {
        return Err(HacnError::ZeroWeight);
    }
    for s in sums.values_mut() {
        *s /= total;
    }
    Ok(Tally {
        shares: sums,
        total_weight: total,
    })
}

/// Initial acceptance threshold from the spread of the first proposals:
/// `clip(0.5 + 0.45·(1 − H/H_max), 0.5, 0.95)` where `H` is the entropy of
/// the proposal distribution and `H_max = ln(max(distinct, 2))`.
pub fn initial_threshold(proposals: &[Proposal]) -> f64 {
    let mut counts: BTreeMap<CandidateId, f64> = BTreeMap::new();
    for p in proposals {
        *counts.entry(p.candidate).or_default() += 1.0;
    }
    let h = entropy(counts.values().copied());
    let h_max = (counts.len().max(2) as f64).ln();
    (0.5 + 0.45 * (1.0 - h / h_max)).clamp(0.5, 0.95)
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ThresholdState {
    theta_0: f64,
    iteration: u32,
    decay: f64,
    floor: f64,
}

impl ThresholdState {
    pub fn new(theta_0: f64) -> Self {
        Self::with_decay(theta_0, DEFAULT_DECAY, DEFAULT_FLOOR)
    }

    pub fn with_decay(theta_0: f64, decay: f64, floor: f64) -> Self {
        Self {
            theta_0,
            iteration: 0,
            decay,
            floor,
        }
    }

    pub fn theta_0(&self) -> f64 {
        self.theta_0
    }

    /// Failed iterations so far.
    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    /// `max(floor, theta_0 · decay^iteration)`.
    pub fn theta(&self) -> f64 {
        (self.theta_0 * self.decay.powi(self.iteration as i32)).max(self.floor)
    }

    /// Record a failed iteration.
    pub fn decay(&mut self) {
        self.iteration += 1;
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VotingParams {
    pub max_iters: u32,
    pub decay: f64,
    pub floor: f64,
    /// Stop starting new iterations once the next one would end after this
    /// many ticks since voting began. The first iteration always runs.
    #[serde(skip)]
    pub time_budget: Option<u64>,
}

impl Default for VotingParams {
    fn default() -> Self {
        Self {
            max_iters: 10,
            decay: DEFAULT_DECAY,
            floor: DEFAULT_FLOOR,
            time_budget: None,
        }
    }
}

/// Result of iterated voting within one group.
#[derive(Clone, Debug, PartialEq)]
pub struct VotingOutcome {
    /// Accepted candidate, or the best-so-far leader when not accepted.
    pub candidate: CandidateId,
    pub share: f64,
    pub accepted: bool,
    pub iterations: u32,
    pub theta_0: f64,
    /// Threshold the last iteration was tested against.
    pub last_theta: f64,
    /// Leader of the final tally (plurality of the last round).
    pub last_leader: CandidateId,
}

fn headcount_leader(proposals: &[Proposal]) -> CandidateId {
    let mut counts: BTreeMap<CandidateId, usize> = BTreeMap::new();
    for p in proposals {
        *counts.entry(p.candidate).or_default() += 1;
    }
    let mut best = (proposals[0].candidate, 0);
    for (c, n) in counts {
        if n > best.1 {
            best = (c, n);
        }
    }
    best.0
}

/// Iterated all-to-all weighted voting among `voters`, charged to `tier`.
/// Shared by tier 1 and the fully-connected baseline.
#[allow(clippy::too_many_arguments)]
pub(crate) fn iterate_votes<B: AgentBehavior + ?Sized>(
    voters: &[&AgentProfile],
    task: &Task,
    candidates: &[Candidate],
    memory: &GlobalMemory,
    params: &VotingParams,
    behavior: &mut B,
    net: &mut Network,
    tier: Tier,
) -> Result<VotingOutcome> {
    if candidates.is_empty() {
        return Err(HacnError::NoCandidates);
    }
    assert!(!voters.is_empty(), "voting group must not be empty");
    let max_iters = params.max_iters.max(1);
    let start = net.clock.now();
    let iteration_cost = net.clock.costs().iteration_cost();
    let m = voters.len() as u64;
    let ballots_per_iteration = m * (m - 1);
    let history: Vec<f64> = voters.iter().map(|a| memory.accuracy_of(a)).collect();

    behavior.begin_iteration(1);
    let mut proposals: Vec<Proposal> = voters
        .iter()
        .map(|a| behavior.propose(a.id, task, candidates))
        .collect();
    let mut threshold =
        ThresholdState::with_decay(initial_threshold(&proposals), params.decay, params.floor);

    let mut best: Option<(CandidateId, f64)> = None;
    let mut last: Option<Tally> = None;
    let mut iterations = 0;
    let mut last_theta = threshold.theta();

    for iteration in 1..=max_iters {
        if let Some(previous) = &last {
            if let Some(budget) = params.time_budget {
                if net.clock.elapsed(start) + iteration_cost > budget {
                    break;
                }
            }
            behavior.begin_iteration(iteration);
            proposals = voters
                .iter()
                .zip(&proposals)
                .map(|(a, p)| behavior.revise(a.id, *p, previous, task, candidates))
                .collect();
        }

        net.broadcast(tier, ballots_per_iteration);
        net.clock.advance(ClockEvent::VotingIteration);
        iterations = iteration;

        let votes: Vec<Vote> = voters
            .iter()
            .zip(&proposals)
            .zip(&history)
            .map(|((a, p), h)| Vote::cast(a.id, *p, *h))
            .collect();
        let current = match tally(&votes) {
            Ok(t) => t,
            Err(HacnError::ZeroWeight) => {
                let leader = headcount_leader(&proposals);
                return Ok(VotingOutcome {
                    candidate: leader,
                    share: 0.0,
                    accepted: false,
                    iterations,
                    theta_0: threshold.theta_0(),
                    last_theta,
                    last_leader: leader,
                });
            }
            Err(e) => return Err(e),
        };
        let (leader, share) = current.leader().expect("positive total weight");
        last_theta = threshold.theta();
        if best.is_none_or(|(_, s)| share > s) {
            best = Some((leader, share));
        }
        if share >= last_theta {
            return Ok(VotingOutcome {
                candidate: leader,
                share,
                accepted: true,
                iterations,
                theta_0: threshold.theta_0(),
                last_theta,
                last_leader: leader,
            });
        }
        threshold.decay();
        last = Some(current);
    }

    let (candidate, share) = best.expect("at least one iteration ran");
    let last_leader = last
        .as_ref()
        .and_then(Tally::leader)
        .map_or(candidate, |(c, _)| c);
    Ok(VotingOutcome {
        candidate,
        share,
        accepted: false,
        iterations,
        theta_0: threshold.theta_0(),
        last_theta,
        last_leader,
    })
}

/// Inputs shared by every cluster of one task.
#[derive(Copy, Clone)]
pub struct LocalContext<'a> {
    pub task: &'a Task,
    pub candidates: &'a [Candidate],
    pub roster: &'a Roster,
    pub memory: &'a GlobalMemory,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalOutcome {
    pub solution: ClusterSolution,
    /// Members that were online and voted.
    pub voters: Vec<AgentId>,
    pub iterations: u32,
    pub theta_0: f64,
    pub last_theta: f64,
}

/// Run confidence-weighted voting in one cluster.
///
/// Returns the accepted candidate with its share as consensus strength, or,
/// after `max_iters` (or when the time budget runs out), the best-so-far
/// leader flagged for escalation.
pub fn local_consensus<B: AgentBehavior + ?Sized>(
    cluster: &Cluster,
    ctx: &LocalContext<'_>,
    params: &VotingParams,
    behavior: &mut B,
    net: &mut Network,
) -> Result<LocalOutcome> {
    let voters: Vec<&AgentProfile> = cluster
        .members
        .iter()
        .filter_map(|id| ctx.roster.get(*id))
        .filter(|a| a.online)
        .collect();
    if voters.is_empty() {
        return Err(HacnError::EmptyCluster(cluster.id));
    }
    let out = iterate_votes(
        &voters,
        ctx.task,
        ctx.candidates,
        ctx.memory,
        params,
        behavior,
        net,
        Tier::Tier1,
    )?;
    Ok(LocalOutcome {
        solution: ClusterSolution {
            cluster: cluster.id,
            candidate: out.candidate,
            strength: out.share,
            member_count: voters.len(),
            escalated: !out.accepted,
        },
        voters: voters.iter().map(|a| a.id).collect(),
        iterations: out.iterations,
        theta_0: out.theta_0,
        last_theta: out.last_theta,
    })
}

/// `1 − (1 − p)^k`: lower bound on the probability that local voting
/// converges within `k` iterations when each iteration agrees with
/// probability `p`.
pub fn convergence_lower_bound(p: f64, k: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    debug_assert!(k >= 1);
    1.0 - (1.0 - p).powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ClusterId, TaskId};
    use proptest::prelude::*;

    /// Agents vote from a fixed script, one entry per (agent, iteration).
    struct Scripted {
        script: BTreeMap<AgentId, Vec<Proposal>>,
        iteration: u32,
    }

    impl Scripted {
        fn new(script: &[(u32, &[(u32, f64)])]) -> Self {
            Self {
                script: script
                    .iter()
                    .map(|(a, ps)| {
                        (
                            AgentId(*a),
                            ps.iter()
                                .map(|&(c, conf)| Proposal {
                                    candidate: CandidateId(c),
                                    confidence: conf,
                                })
                                .collect(),
                        )
                    })
                    .collect(),
                iteration: 0,
            }
        }

        fn at(&self, agent: AgentId) -> Proposal {
            let ps = &self.script[&agent];
            ps[(self.iteration as usize - 1).min(ps.len() - 1)]
        }
    }

    impl AgentBehavior for Scripted {
        fn begin_iteration(&mut self, iteration: u32) {
            self.iteration = iteration;
        }
        fn propose(&mut self, agent: AgentId, _: &Task, _: &[Candidate]) -> Proposal {
            self.at(agent)
        }
        fn revise(&mut self, agent: AgentId, _: Proposal, _: &Tally, _: &Task, _: &[Candidate]) -> Proposal {
            self.at(agent)
        }
    }

    fn profile(id: u32, history: f64) -> AgentProfile {
        AgentProfile {
            id: AgentId(id),
            expertise: vec![0.5, 0.5],
            history,
            availability: 1.0,
            online: true,
        }
    }

    fn fixture(m: u32) -> (Task, Vec<Candidate>, Roster, Cluster) {
        let task = Task::new(TaskId(0), vec![1.0, 1.0], 0.5, 100, 10.0).unwrap();
        let candidates = (0..6)
            .map(|i| Candidate {
                id: CandidateId(i),
                feature: vec![1.0, 0.0],
                cost: 0.0,
            })
            .collect();
        let roster = Roster::new((0..m).map(|i| profile(i, 1.0)).collect());
        let cluster = Cluster {
            id: ClusterId(0),
            members: (0..m).map(AgentId).collect(),
            leader: AgentId(0),
            centroid: vec![],
        };
        (task, candidates, roster, cluster)
    }

    fn prop(c: u32) -> Proposal {
        Proposal {
            candidate: CandidateId(c),
            confidence: 1.0,
        }
    }

    #[test]
    fn vote_weight_examples() {
        assert_eq!(vote_weight(1.0, 1.0), 1.0);
        assert!((vote_weight(0.8, 0.9) - 0.72).abs() < 1e-12);
        assert_eq!(vote_weight(0.7, 0.0), 0.0);
    }

    #[test]
    fn initial_threshold_examples() {
        assert_eq!(initial_threshold(&[prop(1), prop(1), prop(1)]), 0.95);
        assert!((initial_threshold(&[prop(0), prop(1), prop(2)]) - 0.5).abs() < 1e-12);
        let t = initial_threshold(&[prop(0), prop(0), prop(0), prop(1)]);
        // H = 0.5623, H_max = ln 2, 1 - H/H_max = 0.18872
        assert!((t - (0.5 + 0.45 * (1.0 - 0.562_335_144_618_808_9 / 2f64.ln()))).abs() < 1e-12);
        assert!((t - 0.585).abs() < 1e-3);
    }

    #[test]
    fn tally_examples() {
        let v = |a: u32, c: u32, w: f64| Vote::cast(AgentId(a), prop(c), w);
        let t = tally(&[v(0, 3, 0.4)]).unwrap();
        assert_eq!(t.share(CandidateId(3)), 1.0);
        let t = tally(&[v(0, 0, 0.72), v(1, 1, 0.28)]).unwrap();
        assert!((t.share(CandidateId(0)) - 0.72).abs() < 1e-12);
        assert!((t.share(CandidateId(1)) - 0.28).abs() < 1e-12);
        assert_eq!(tally(&[v(0, 0, 0.0)]), Err(HacnError::ZeroWeight));
    }

    #[test]
    fn leader_ties_go_to_lowest_id() {
        let t = Tally::from_shares(BTreeMap::from([(CandidateId(4), 0.5), (CandidateId(2), 0.5)]));
        assert_eq!(t.leader(), Some((CandidateId(2), 0.5)));
    }

    #[test]
    fn unanimous_cluster_converges_in_one_iteration() {
        let (task, candidates, roster, cluster) = fixture(4);
        let memory = GlobalMemory::new();
        let ctx = LocalContext {
            task: &task,
            candidates: &candidates,
            roster: &roster,
            memory: &memory,
        };
        let mut b = Scripted::new(&[(0, &[(2, 0.9)]), (1, &[(2, 0.6)]), (2, &[(2, 1.0)]), (3, &[(2, 0.3)])]);
        let mut net = Network::default();
        let out = local_consensus(&cluster, &ctx, &VotingParams::default(), &mut b, &mut net).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.solution.candidate, CandidateId(2));
        assert_eq!(out.solution.strength, 1.0);
        assert!(!out.solution.escalated);
        assert_eq!(net.bus.count(Tier::Tier1), 12);
    }

    #[test]
    fn acceptance_uses_decayed_threshold() {
        // Round-1 headcount (4, 1) gives theta_0 = 0.5 + 0.45(1 - H/ln 2) = 0.6251.
        // Weighted shares of candidate 0: 0.5, 0.5, 1.4/2.4 = 0.5833.
        // 0.5833 clears theta_0 * 0.95^2 = 0.5642 but not theta_0 * 0.95 = 0.5939.
        let (task, candidates, roster, cluster) = fixture(5);
        let memory = GlobalMemory::new();
        let ctx = LocalContext {
            task: &task,
            candidates: &candidates,
            roster: &roster,
            memory: &memory,
        };
        let low: &[(u32, f64)] = &[(0, 0.25), (0, 0.25), (0, 0.35)];
        let mut b = Scripted::new(&[(0, low), (1, low), (2, low), (3, low), (4, &[(1, 1.0)])]);
        let theta_0 = initial_threshold(&[prop(0), prop(0), prop(0), prop(0), prop(1)]);
        assert!((theta_0 - 0.6251).abs() < 1e-4);
        let mut net = Network::default();
        let out = local_consensus(&cluster, &ctx, &VotingParams::default(), &mut b, &mut net).unwrap();
        assert_eq!(out.iterations, 3);
        assert!(!out.solution.escalated);
        assert_eq!(out.last_theta, theta_0 * 0.95f64.powi(2));
        assert!((out.solution.strength - 1.4 / 2.4).abs() < 1e-12);
        assert_eq!(net.bus.count(Tier::Tier1), 3 * 20);
        assert_eq!(net.clock.now(), 3 * 4);
    }

    #[test]
    fn decay_example_from_point_nine() {
        let mut s = ThresholdState::new(0.9);
        s.decay();
        s.decay();
        assert!((s.theta() - 0.812_25).abs() < 1e-12);
    }

    #[test]
    fn escalates_with_best_so_far_after_max_iters() {
        let (task, candidates, roster, cluster) = fixture(3);
        let memory = GlobalMemory::new();
        let ctx = LocalContext {
            task: &task,
            candidates: &candidates,
            roster: &roster,
            memory: &memory,
        };
        let mut b = Scripted::new(&[(0, &[(0, 1.0)]), (1, &[(1, 1.0)]), (2, &[(2, 1.0)])]);
        let mut net = Network::default();
        let params = VotingParams {
            max_iters: 4,
            ..Default::default()
        };
        let out = local_consensus(&cluster, &ctx, &params, &mut b, &mut net).unwrap();
        assert!(out.solution.escalated);
        assert_eq!(out.iterations, 4);
        assert_eq!(out.solution.candidate, CandidateId(0));
        assert!((out.solution.strength - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(net.bus.count(Tier::Tier1), 4 * 6);
    }

    #[test]
    fn zero_weight_escalates_with_zero_strength() {
        let (task, candidates, _, cluster) = fixture(3);
        let roster = Roster::new((0..3).map(|i| profile(i, 0.0)).collect());
        let memory = GlobalMemory::new();
        let ctx = LocalContext {
            task: &task,
            candidates: &candidates,
            roster: &roster,
            memory: &memory,
        };
        let mut b = Scripted::new(&[(0, &[(1, 1.0)]), (1, &[(1, 1.0)]), (2, &[(2, 1.0)])]);
        let out = local_consensus(&cluster, &ctx, &VotingParams::default(), &mut b, &mut Network::default())
            .unwrap();
        assert!(out.solution.escalated);
        assert_eq!(out.solution.strength, 0.0);
        assert_eq!(out.solution.candidate, CandidateId(1));
    }

    #[test]
    fn offline_members_do_not_vote_or_send() {
        let (task, candidates, _, cluster) = fixture(4);
        let mut agents: Vec<_> = (0..4).map(|i| profile(i, 1.0)).collect();
        agents[3].online = false;
        let roster = Roster::new(agents);
        let memory = GlobalMemory::new();
        let ctx = LocalContext {
            task: &task,
            candidates: &candidates,
            roster: &roster,
            memory: &memory,
        };
        let mut b = Scripted::new(&[(0, &[(1, 1.0)]), (1, &[(1, 1.0)]), (2, &[(1, 1.0)]), (3, &[(2, 1.0)])]);
        let mut net = Network::default();
        let out = local_consensus(&cluster, &ctx, &VotingParams::default(), &mut b, &mut net).unwrap();
        assert_eq!(out.solution.member_count, 3);
        assert_eq!(net.bus.count(Tier::Tier1), 6);
        assert!(!out.voters.contains(&AgentId(3)));
    }

    #[test]
    fn empty_cluster_is_an_error() {
        let (task, candidates, _, cluster) = fixture(3);
        let roster = Roster::new(
            (0..3)
                .map(|i| AgentProfile {
                    online: false,
                    ..profile(i, 1.0)
                })
                .collect(),
        );
        let memory = GlobalMemory::new();
        let ctx = LocalContext {
            task: &task,
            candidates: &candidates,
            roster: &roster,
            memory: &memory,
        };
        let mut b = Scripted::new(&[]);
        assert_eq!(
            local_consensus(&cluster, &ctx, &VotingParams::default(), &mut b, &mut Network::default()),
            Err(HacnError::EmptyCluster(ClusterId(0)))
        );
    }

    #[test]
    fn time_budget_stops_iterating() {
        let (task, candidates, roster, cluster) = fixture(3);
        let memory = GlobalMemory::new();
        let ctx = LocalContext {
            task: &task,
            candidates: &candidates,
            roster: &roster,
            memory: &memory,
        };
        let mut b = Scripted::new(&[(0, &[(0, 1.0)]), (1, &[(1, 1.0)]), (2, &[(2, 1.0)])]);
        let mut net = Network::default();
        let params = VotingParams {
            time_budget: Some(9),
            ..Default::default()
        };
        let out = local_consensus(&cluster, &ctx, &params, &mut b, &mut net).unwrap();
        // 4 ticks per iteration: 2 fit in 9, a third would end at 12.
        assert_eq!(out.iterations, 2);
        assert_eq!(net.clock.now(), 8);
    }

    #[test]
    fn convergence_bound_examples() {
        assert_eq!(convergence_lower_bound(1.0, 7), 1.0);
        assert_eq!(convergence_lower_bound(0.5, 1), 0.5);
        assert!((convergence_lower_bound(0.2, 3) - 0.488).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn threshold_trajectory_is_exact(theta_0 in 0.01f64..=1.0, fails in 0u32..=20) {
            let mut s = ThresholdState::new(theta_0);
            for _ in 0..fails {
                s.decay();
            }
            prop_assert_eq!(s.theta(), (theta_0 * 0.95f64.powi(fails as i32)).max(0.5));
        }

        #[test]
        fn shares_sum_to_one(ws in proptest::collection::vec((0u32..4, 0.01f64..1.0), 1..12)) {
            let votes: Vec<Vote> = ws.iter().enumerate()
                .map(|(i, &(c, w))| Vote::cast(AgentId(i as u32), prop(c), w))
                .collect();
            let t = tally(&votes).unwrap();
            prop_assert!((t.shares().values().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
