//! Per-task orchestration of the three tiers.
//!
//! For every task the engine (re)forms clusters, runs tier-1 voting in each
//! cluster on its own clock shard, collects one report per reachable
//! cluster, and then finalises by the cheapest applicable route: unanimous
//! local acceptance, partial consensus, or debate plus arbitration (with the
//! weighted-majority fallback). The global memory is updated on every route.
//!
//! Time budget: tier 1 may use half of the deadline. Whatever remains is the
//! arbitration budget `τ'`; debate may fill 70% of it, which leaves room for
//! the final report exchange.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::{ClockCosts, MessageCounts, Network};
use crate::cluster::{form_clusters, reform_clusters, ClusterConfig, Clustering, ReformReason};
use crate::domain::{
    find_candidate, AgentId, Candidate, CandidateId, ClusterId, ClusterReport, EscalationPath,
    GlobalMemory, Roster, Task,
};
use crate::error::{FieldError, HacnError, Result};
use crate::math::mix_seed;
use crate::tier1::{local_consensus, AgentBehavior, LocalContext, LocalOutcome, VotingParams};
use crate::tier2::{partial_consensus, select_representatives, Budget, DebateOutcome, DebateParams};
use crate::tier3::{
    commit, feasibility_checks, global_arbitrate, ArbitrationContext, ArbitrationParams, Commit,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolParams {
    pub cluster: ClusterConfig,
    pub voting: VotingParams,
    pub debate: DebateParams,
    pub arbitration: ArbitrationParams,
    /// Share of total cluster backing that settles a task without debate.
    pub partial_threshold: f64,
    /// Per-task probability that a cluster is cut off from the arbiter.
    pub partition_rate: f64,
    pub costs: ClockCosts,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            cluster: ClusterConfig::default(),
            voting: VotingParams::default(),
            debate: DebateParams::default(),
            arbitration: ArbitrationParams::default(),
            partial_threshold: 0.75,
            partition_rate: 0.0,
            costs: ClockCosts::default(),
        }
    }
}

impl ProtocolParams {
    pub fn field_errors(&self, prefix: &str) -> Vec<FieldError> {
        let mut errs = self.cluster.field_errors(&format!("{prefix}cluster."));
        let v = &self.voting;
        if v.max_iters == 0 {
            errs.push(FieldError::new(format!("{prefix}voting.max_iters"), "must be at least 1"));
        }
        if !(v.decay > 0.0 && v.decay <= 1.0) {
            errs.push(FieldError::new(format!("{prefix}voting.decay"), "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&v.floor) {
            errs.push(FieldError::new(format!("{prefix}voting.floor"), "must lie in [0, 1]"));
        }
        let d = &self.debate;
        if !(d.switch_margin >= 0.0) {
            errs.push(FieldError::new(format!("{prefix}debate.switch_margin"), "must be >= 0"));
        }
        if d.budget_den == 0 || d.budget_num >= d.budget_den {
            errs.push(FieldError::new(
                format!("{prefix}debate.budget_num"),
                "debate share budget_num / budget_den must lie in [0, 1)",
            ));
        }
        errs.extend(self.arbitration.field_errors(&format!("{prefix}arbitration.")));
        if !(self.partial_threshold > 0.5 && self.partial_threshold <= 1.0) {
            errs.push(FieldError::new(format!("{prefix}partial_threshold"), "must lie in (0.5, 1]"));
        }
        if !(0.0..=1.0).contains(&self.partition_rate) {
            errs.push(FieldError::new(format!("{prefix}partition_rate"), "must lie in [0, 1]"));
        }
        let c = &self.costs;
        if c.message == 0 || c.voting_iteration == 0 || c.debate_round == 0 {
            errs.push(FieldError::new(format!("{prefix}costs"), "every cost must be at least 1 tick"));
        }
        errs
    }
}

/// Smallest deadline for which every route finishes in time: the first
/// voting iteration must fit in half of it, and the remainder must hold the
/// report exchanges outside the debate share.
pub fn min_deadline(costs: &ClockCosts, debate: &DebateParams) -> u64 {
    let m = costs.message;
    let spare = debate.budget_den.saturating_sub(debate.budget_num).max(1);
    // τ' >= m / (1 - share), rounded up
    let arbitration = (m * debate.budget_den).div_ceil(spare).max(2 * m);
    (2 * costs.iteration_cost()).max(2 * arbitration)
}

/// Everything that happened while deciding one task.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskOutcome {
    pub decision: CandidateId,
    pub path: EscalationPath,
    pub messages: MessageCounts,
    /// Virtual ticks from task start to decision.
    pub ticks: u64,
    pub clusters: usize,
    pub mean_cluster_size: f64,
    pub silhouette: f64,
    pub reformed: Option<ReformReason>,
    pub local: Vec<LocalOutcome>,
    pub unreachable: Vec<ClusterId>,
    pub debate: Option<DebateOutcome>,
    pub minority: usize,
}

impl TaskOutcome {
    /// Longest tier-1 run plus executed debate rounds.
    pub fn rounds(&self) -> u32 {
        let tier1 = self.local.iter().map(|l| l.iterations).max().unwrap_or(0);
        tier1 + self.debate.as_ref().map_or(0, |d| d.rounds)
    }
}

/// The hierarchical engine with its state across tasks.
#[derive(Clone, Debug)]
pub struct Hacn {
    params: ProtocolParams,
    roster: Roster,
    memory: GlobalMemory,
    clustering: Option<(Clustering, Vec<f64>)>,
    seed: u64,
    /// Ticks consumed by earlier tasks, for global timestamps.
    elapsed: u64,
}

impl Hacn {
    pub fn new(roster: Roster, params: ProtocolParams, seed: u64) -> Result<Self> {
        let errs = params.field_errors("protocol.");
        if !errs.is_empty() {
            return Err(HacnError::Config(errs));
        }
        let active = roster.online().count();
        if active < 3 {
            return Err(HacnError::TooFewActive { needed: 3, found: active });
        }
        Ok(Self {
            params,
            roster,
            memory: GlobalMemory::new(),
            clustering: None,
            seed,
            elapsed: 0,
        })
    }

    pub fn memory(&self) -> &GlobalMemory {
        &self.memory
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn clustering(&self) -> Option<&Clustering> {
        self.clustering.as_ref().map(|(c, _)| c)
    }

    fn update_clusters(&mut self, task: &Task, seed: u64) -> Result<Option<ReformReason>> {
        let cfg = &self.params.cluster;
        match &self.clustering {
            None => {
                let c = form_clusters(&self.roster, task, &self.memory, cfg, seed)?;
                self.clustering = Some((c, task.required_expertise.clone()));
                Ok(None)
            }
            Some((prev, req)) => {
                match reform_clusters(prev, req, task, &self.roster, &self.memory, cfg, seed)? {
                    Some((c, reason)) => {
                        self.clustering = Some((c, task.required_expertise.clone()));
                        Ok(Some(reason))
                    }
                    None => Ok(None),
                }
            }
        }
    }

    fn draw_partition(&self, clusters: &[ClusterId], seed: u64) -> BTreeSet<ClusterId> {
        let rate = self.params.partition_rate;
        if rate <= 0.0 || clusters.len() < 2 {
            return BTreeSet::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x5041_5254));
        let mut cut: BTreeSet<ClusterId> = clusters
            .iter()
            .copied()
            .filter(|_| rng.random_bool(rate))
            .collect();
        if cut.len() == clusters.len() {
            // keep one cluster reachable
            let keep = clusters[rng.random_range(0..clusters.len())];
            cut.remove(&keep);
        }
        cut
    }

    /// Decide one task.
    ///
    /// # Errors
    ///
    /// Rejects an empty candidate list or a deadline below
    /// [`min_deadline`]. Otherwise a decision is always produced.
    pub fn run_task<B: AgentBehavior + ?Sized>(
        &mut self,
        task: &Task,
        candidates: &[Candidate],
        behavior: &mut B,
    ) -> Result<TaskOutcome> {
        if candidates.is_empty() {
            return Err(HacnError::NoCandidates);
        }
        let floor = min_deadline(&self.params.costs, &self.params.debate);
        if task.deadline < floor {
            return Err(HacnError::InvalidInput(format!(
                "deadline {} is below the minimum of {floor} ticks",
                task.deadline
            )));
        }
        let seed = mix_seed(self.seed, u64::from(task.id.0));
        let reformed = self.update_clusters(task, seed)?;
        let clustering = self.clustering.as_ref().expect("clusters formed").0.clone();

        let mut net = Network::new(self.params.costs);
        let tau = task.deadline;

        // tier 1, one shard per cluster
        let voting = VotingParams {
            time_budget: Some(tau / 2),
            ..self.params.voting
        };
        let ctx = LocalContext {
            task,
            candidates,
            roster: &self.roster,
            memory: &self.memory,
        };
        let mut shards = Vec::with_capacity(clustering.clusters.len());
        let mut local = Vec::with_capacity(clustering.clusters.len());
        for cluster in &clustering.clusters {
            let mut shard = net.fork();
            local.push(local_consensus(cluster, &ctx, &voting, behavior, &mut shard)?);
            shards.push(shard);
        }
        net.join(&shards);

        let ids: Vec<ClusterId> = clustering.clusters.iter().map(|c| c.id).collect();
        let cut = self.draw_partition(&ids, seed);
        let reports: Vec<ClusterReport> = local
            .iter()
            .filter(|l| !cut.contains(&l.solution.cluster))
            .map(|l| ClusterReport {
                solution: l.solution.clone(),
                members: l.voters.clone(),
            })
            .collect();
        let solutions: Vec<_> = reports.iter().map(|r| r.solution.clone()).collect();

        let budget = Budget {
            start: net.clock.now(),
            tau: tau - net.clock.now(),
        };
        let reps = select_representatives(&solutions, &clustering.clusters, &mut net)?;

        let feasible = |c: CandidateId| {
            find_candidate(candidates, c).is_some_and(|cand| {
                feasibility_checks(cand, task, &self.memory, &self.params.arbitration).all_passed()
            })
        };
        let unanimous = solutions
            .iter()
            .all(|s| !s.escalated && s.candidate == solutions[0].candidate);

        let lr = self.params.arbitration.learning_rate;
        let timestamp = self.elapsed + net.clock.now();
        let (decision, path, minority, debate) = if unanimous && feasible(solutions[0].candidate) {
            let d = solutions[0].candidate;
            commit(
                &mut self.memory,
                &self.roster,
                Commit {
                    task,
                    candidates,
                    reports: &reports,
                    decision: d,
                    path: EscalationPath::LocalAcceptance,
                    minority: Vec::new(),
                    timestamp,
                },
                lr,
            );
            (d, EscalationPath::LocalAcceptance, 0, None)
        } else if let Some((d, minority)) = partial_consensus(&solutions, self.params.partial_threshold)
            .filter(|(d, _)| feasible(*d))
        {
            let n = minority.len();
            commit(
                &mut self.memory,
                &self.roster,
                Commit {
                    task,
                    candidates,
                    reports: &reports,
                    decision: d,
                    path: EscalationPath::PartialConsensus,
                    minority,
                    timestamp,
                },
                lr,
            );
            (d, EscalationPath::PartialConsensus, n, None)
        } else {
            let actx = ArbitrationContext {
                task,
                candidates,
                roster: &self.roster,
            };
            let out = global_arbitrate(
                &reports,
                &reps,
                &actx,
                &mut self.memory,
                budget,
                &self.params.debate,
                &self.params.arbitration,
                &mut net,
            )?;
            (out.decision, out.path, 0, Some(out.debate))
        };

        let ticks = net.clock.now();
        self.elapsed += ticks;
        Ok(TaskOutcome {
            decision,
            path,
            messages: net.bus.snapshot(),
            ticks,
            clusters: clustering.clusters.len(),
            mean_cluster_size: clustering.mean_size(),
            silhouette: clustering.silhouette,
            reformed,
            local,
            unreachable: cut.into_iter().collect(),
            debate,
            minority,
        })
    }
}

/// Agents that took part in a task's tier-1 voting.
pub fn participants(outcome: &TaskOutcome) -> Vec<AgentId> {
    let mut all: Vec<AgentId> = outcome.local.iter().flat_map(|l| l.voters.clone()).collect();
    all.sort();
    all
}
