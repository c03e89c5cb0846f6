//! Tier 3: global arbitration.
//!
//! Debate solutions are compared by feature similarity and grouped by
//! average-linkage agglomeration at a 0.7 cut. Each group contributes its
//! medoid, scored by cumulative similarity to all debate solutions. Medoids
//! that pass the technical, consistency and resource checks get a bonus that
//! grows with their pass margins, and the best adjusted score wins. If none
//! passes, the original cluster solutions decide by backing-weighted
//! majority. Either way, agent reliability and the global memory are updated.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clock::{Network, Tier};
use crate::domain::{
    find_candidate, AgentId, Candidate, CandidateId, ClusterReport, ClusterSolution,
    ConsensusRecord, EscalationPath, GlobalMemory, PriorDecision, Roster, Task,
};
use crate::error::{HacnError, Result};
use crate::math::{cosine, unit_similarity};
use crate::tier2::{self, Budget, DebateOutcome, DebateParams, Representative};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArbitrationParams {
    /// Similarity cut for grouping solutions, Υ.
    pub upsilon: f64,
    /// Reliability learning rate λ.
    pub learning_rate: f64,
    /// Technical check: relevance must reach `omega_factor × complexity`.
    pub omega_factor: f64,
    /// Consistency check: requirement cosine that makes a prior task related.
    pub phi_related: f64,
    /// Consistency check: minimum mean similarity to related prior decisions.
    pub phi_min: f64,
    /// Bonus at full margins is `1 + bonus_scale`.
    pub bonus_scale: f64,
}

impl Default for ArbitrationParams {
    fn default() -> Self {
        Self {
            upsilon: 0.7,
            learning_rate: 0.1,
            omega_factor: 0.5,
            phi_related: 0.9,
            phi_min: 0.3,
            bonus_scale: 0.1,
        }
    }
}

impl ArbitrationParams {
    pub fn field_errors(&self, prefix: &str) -> Vec<crate::error::FieldError> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("upsilon", self.upsilon),
            ("learning_rate", self.learning_rate),
            ("omega_factor", self.omega_factor),
            ("phi_min", self.phi_min),
            ("bonus_scale", self.bonus_scale),
        ] {
            if !(0.0..=1.0).contains(&v) {
                errs.push(crate::error::FieldError::new(format!("{prefix}{name}"), "must lie in [0, 1]"));
            }
        }
        if !(-1.0..=1.0).contains(&self.phi_related) {
            errs.push(crate::error::FieldError::new(format!("{prefix}phi_related"), "must lie in [-1, 1]"));
        }
        errs
    }
}

/// Symmetric pairwise similarity with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// # Panics
    ///
    /// If `values` is not `n × n`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self {
            n,
            values: rows.into_iter().flatten().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// `(cos + 1) / 2` between candidate features.
pub fn similarity_matrix(solutions: &[CandidateId], candidates: &[Candidate]) -> Result<SimilarityMatrix> {
    let features = solutions
        .iter()
        .map(|id| {
            find_candidate(candidates, *id)
                .map(|c| c.feature.as_slice())
                .ok_or_else(|| HacnError::InvalidInput(format!("unknown candidate {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = features.len();
    let mut rows = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s = if solutions[i] == solutions[j] {
                1.0
            } else {
                unit_similarity(features[i], features[j])
            };
            rows[i][j] = s;
            rows[j][i] = s;
        }
    }
    Ok(SimilarityMatrix::from_rows(rows))
}

/// Average-linkage agglomeration: merge the most similar pair of groups while
/// their mean pairwise similarity is at least `upsilon`. Ties go to the pair
/// with the lowest member indices. Groups come back sorted.
pub fn hier_cluster(mat: &SimilarityMatrix, upsilon: f64) -> Vec<Vec<usize>> {
    let n = mat.len();
    let mut groups: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    // linkage[a][b] for live groups a < b, updated by Lance-Williams
    let mut link: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| mat.get(i, j)).collect()).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if groups[a].is_none() {
                continue;
            }
            for b in a + 1..n {
                if groups[b].is_none() {
                    continue;
                }
                // live groups keep their lowest member at their slot, so slot
                // order is member order
                if best.is_none_or(|(s, _, _)| link[a][b] > s) {
                    best = Some((link[a][b], a, b));
                }
            }
        }
        let Some((s, a, b)) = best else { break };
        if s < upsilon {
            break;
        }
        let gb = groups[b].take().expect("live group");
        let ga = groups[a].as_mut().expect("live group");
        let (na, nb) = (ga.len() as f64, gb.len() as f64);
        ga.extend(gb);
        ga.sort_unstable();
        for c in 0..n {
            if c == a || groups[c].is_none() {
                continue;
            }
            let v = (na * link[a][c] + nb * link[b][c]) / (na + nb);
            link[a][c] = v;
            link[c][a] = v;
        }
    }
    groups.into_iter().flatten().collect()
}

/// The group member with the highest cumulative similarity to every
/// solution, with that score. Ties go to the lowest index.
pub fn cluster_representative(group: &[usize], mat: &SimilarityMatrix) -> (usize, f64) {
    assert!(!group.is_empty(), "group must be nonempty");
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    let mut sorted = group.to_vec();
    sorted.sort_unstable();
    for i in sorted {
        let score: f64 = (0..mat.len()).map(|j| mat.get(i, j)).sum();
        if score > best.1 {
            best = (i, score);
        }
    }
    best
}

/// Outcome of one check: the margin is only meaningful on a pass.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub passed: bool,
    pub margin: Option<f64>,
}

impl Check {
    fn of(passed: bool, margin: f64) -> Self {
        Self {
            passed,
            margin: passed.then_some(margin.clamp(0.0, 1.0)),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Technical fit of the candidate to the task.
    pub omega: Check,
    /// Consistency with prior decisions on related tasks.
    pub phi: Check,
    /// Cost within the resource budget.
    pub psi: Check,
}

impl FeasibilityReport {
    pub fn all_passed(&self) -> bool {
        self.omega.passed && self.phi.passed && self.psi.passed
    }
}

pub fn feasibility_checks(
    candidate: &Candidate,
    task: &Task,
    memory: &GlobalMemory,
    params: &ArbitrationParams,
) -> FeasibilityReport {
    let relevance = unit_similarity(&candidate.feature, &task.required_expertise);
    let bound = params.omega_factor * task.complexity;
    let omega = Check::of(relevance >= bound, relevance - bound);

    let related: Vec<&PriorDecision> = memory
        .prior_decisions()
        .iter()
        .filter(|p| cosine(&p.requirement, &task.required_expertise) >= params.phi_related)
        .collect();
    let phi = if related.is_empty() {
        Check::of(true, 1.0)
    } else {
        let mean = related
            .iter()
            .map(|p| unit_similarity(&candidate.feature, &p.feature))
            .sum::<f64>()
            / related.len() as f64;
        Check::of(mean >= params.phi_min, mean - params.phi_min)
    };

    let budget = task.resource_budget;
    let psi = if budget > 0.0 {
        Check::of(candidate.cost <= budget, 1.0 - candidate.cost / budget)
    } else {
        Check::of(candidate.cost <= 0.0, 1.0)
    };
    FeasibilityReport { omega, phi, psi }
}

/// `1 + scale × mean margin`.
///
/// # Errors
///
/// [`HacnError::FailedCheck`] if any check failed.
pub fn feasibility_bonus(report: &FeasibilityReport, scale: f64) -> Result<f64> {
    let margins = [report.omega, report.phi, report.psi]
        .iter()
        .map(|c| c.margin.filter(|_| c.passed))
        .collect::<Option<Vec<f64>>>()
        .ok_or(HacnError::FailedCheck)?;
    Ok(1.0 + scale * margins.iter().sum::<f64>() / 3.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub candidate: CandidateId,
    /// Cumulative similarity of the group medoid.
    pub score: f64,
    pub report: FeasibilityReport,
    /// `score × bonus` when feasible.
    pub adjusted: Option<f64>,
}

/// Group, extract medoids, validate and score. Returns every medoid's score
/// and the winning candidate if any was feasible.
pub fn select_candidate(
    solutions: &[CandidateId],
    candidates: &[Candidate],
    task: &Task,
    memory: &GlobalMemory,
    params: &ArbitrationParams,
) -> Result<(Vec<ScoredCandidate>, Option<CandidateId>)> {
    let mat = similarity_matrix(solutions, candidates)?;
    let mut scored = Vec::new();
    for group in hier_cluster(&mat, params.upsilon) {
        let (medoid, score) = cluster_representative(&group, &mat);
        let id = solutions[medoid];
        let cand = find_candidate(candidates, id).expect("checked by similarity_matrix");
        let report = feasibility_checks(cand, task, memory, params);
        let adjusted = feasibility_bonus(&report, params.bonus_scale)
            .ok()
            .map(|b| score * b);
        scored.push(ScoredCandidate {
            candidate: id,
            score,
            report,
            adjusted,
        });
    }
    let winner = scored
        .iter()
        .filter_map(|s| s.adjusted.map(|a| (a, s.candidate)))
        .max_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)))
        .map(|(_, c)| c);
    Ok((scored, winner))
}

/// Backing-weighted majority over cluster solutions. Ties go to the cheaper
/// candidate, then to the higher mean consensus strength of its clusters,
/// then to the lower id.
///
/// # Errors
///
/// [`HacnError::InvalidInput`] on an empty input or an unknown candidate.
pub fn fallback(solutions: &[ClusterSolution], candidates: &[Candidate]) -> Result<CandidateId> {
    #[derive(Default)]
    struct Tally {
        votes: f64,
        strength: f64,
        clusters: usize,
    }
    let mut tally: BTreeMap<CandidateId, Tally> = BTreeMap::new();
    for s in solutions {
        let t = tally.entry(s.candidate).or_default();
        t.votes += s.backing();
        t.strength += s.strength;
        t.clusters += 1;
    }
    let mut ranked = Vec::with_capacity(tally.len());
    for (id, t) in tally {
        let cost = find_candidate(candidates, id)
            .ok_or_else(|| HacnError::InvalidInput(format!("unknown candidate {id}")))?
            .cost;
        ranked.push((id, t.votes, cost, t.strength / t.clusters as f64));
    }
    ranked
        .into_iter()
        .max_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then(b.2.total_cmp(&a.2))
                .then(a.3.total_cmp(&b.3))
                .then(b.0.cmp(&a.0))
        })
        .map(|r| r.0)
        .ok_or_else(|| HacnError::InvalidInput("no cluster solutions to fall back on".into()))
}

/// `h ← (1 − λ)h + λ·[cluster solution == decision]` for every member of
/// every reporting cluster.
pub fn update_reliability(
    reports: &[ClusterReport],
    decision: CandidateId,
    roster: &Roster,
    memory: &GlobalMemory,
    learning_rate: f64,
) -> BTreeMap<AgentId, f64> {
    let mut out = BTreeMap::new();
    for r in reports {
        let target = if r.solution.candidate == decision { 1.0 } else { 0.0 };
        for id in &r.members {
            let Some(agent) = roster.get(*id) else { continue };
            let h = memory.accuracy_of(agent);
            out.insert(*id, ((1.0 - learning_rate) * h + learning_rate * target).clamp(0.0, 1.0));
        }
    }
    out
}

/// A decision ready to be written to the global memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Commit<'a> {
    pub task: &'a Task,
    pub candidates: &'a [Candidate],
    pub reports: &'a [ClusterReport],
    pub decision: CandidateId,
    pub path: EscalationPath,
    pub minority: Vec<ClusterSolution>,
    pub timestamp: u64,
}

/// Update reliabilities, append the consensus record and the prior decision.
/// Returns the merged metrics.
pub fn commit(
    memory: &mut GlobalMemory,
    roster: &Roster,
    commit: Commit<'_>,
    learning_rate: f64,
) -> BTreeMap<AgentId, f64> {
    let metrics = update_reliability(commit.reports, commit.decision, roster, memory, learning_rate);
    memory.merge_metrics(&metrics);
    let feature = find_candidate(commit.candidates, commit.decision)
        .map(|c| c.feature.clone())
        .unwrap_or_default();
    memory.push_prior(PriorDecision {
        task: commit.task.id,
        requirement: commit.task.required_expertise.clone(),
        candidate: commit.decision,
        feature,
    });
    memory.record(ConsensusRecord {
        task: commit.task.id,
        clusters: commit.reports.to_vec(),
        decision: commit.decision,
        path: commit.path,
        minority: commit.minority,
        timestamp: commit.timestamp,
    });
    metrics
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arbitration {
    pub decision: CandidateId,
    /// [`EscalationPath::Arbitration`] or [`EscalationPath::Fallback`].
    pub path: EscalationPath,
    pub debate: DebateOutcome,
    pub scored: Vec<ScoredCandidate>,
    pub metrics: BTreeMap<AgentId, f64>,
}

/// Everything arbitration reads besides the cluster reports.
#[derive(Copy, Clone)]
pub struct ArbitrationContext<'a> {
    pub task: &'a Task,
    pub candidates: &'a [Candidate],
    pub roster: &'a Roster,
}

/// Debate among `reps`, forward the debate solutions to the arbiter, select
/// or fall back, and commit the decision.
///
/// `reports` are the original solutions of the clusters behind `reps`, in the
/// same order. Always produces a decision for well-formed input.
#[allow(clippy::too_many_arguments)]
pub fn global_arbitrate(
    reports: &[ClusterReport],
    reps: &[Representative],
    ctx: &ArbitrationContext<'_>,
    memory: &mut GlobalMemory,
    budget: Budget,
    debate_params: &DebateParams,
    params: &ArbitrationParams,
    net: &mut Network,
) -> Result<Arbitration> {
    if reports.is_empty() || reps.is_empty() {
        return Err(HacnError::InvalidInput("arbitration needs at least one cluster".into()));
    }
    let debate = tier2::debate(reps, ctx.roster, memory, budget, debate_params, net);
    net.broadcast(Tier::Tier3, debate.solutions.len() as u64);

    let (scored, winner) = select_candidate(&debate.solutions, ctx.candidates, ctx.task, memory, params)?;
    let (decision, path) = match winner {
        Some(c) => (c, EscalationPath::Arbitration),
        None => {
            let original: Vec<ClusterSolution> = reports.iter().map(|r| r.solution.clone()).collect();
            (fallback(&original, ctx.candidates)?, EscalationPath::Fallback)
        }
    };
    let metrics = commit(
        memory,
        ctx.roster,
        Commit {
            task: ctx.task,
            candidates: ctx.candidates,
            reports,
            decision,
            path,
            minority: Vec::new(),
            timestamp: net.clock.now(),
        },
        params.learning_rate,
    );
    Ok(Arbitration {
        decision,
        path,
        debate,
        scored,
        metrics,
    })
}
