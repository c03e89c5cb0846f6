//! Tier 2: cluster leaders debate on behalf of their clusters.
//!
//! Each leader reports its cluster's solution with a backing of
//! `cs_str × members`. Debate rounds run while the next round still fits in
//! 70% of the arbitration budget. In a round every representative argues for
//! its current solution; the argument is as strong as the representative's
//! normalised backing times its historical accuracy. A representative adopts
//! the strongest opposing argument only if it beats its own by more than the
//! switch margin.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::clock::{exceeds_fraction, ClockEvent, Network, Tier};
use crate::cluster::Cluster;
use crate::domain::{AgentId, CandidateId, ClusterId, ClusterSolution, GlobalMemory, Roster};
use crate::error::{HacnError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Representative {
    pub agent: AgentId,
    pub cluster: ClusterId,
    pub solution: CandidateId,
    /// `cs_str × member_count` at selection time; in debate-normalised units
    /// after a switch.
    pub backing: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Argument {
    pub author: AgentId,
    pub for_candidate: CandidateId,
    pub strength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DebateParams {
    /// Relative improvement an opposing argument needs before a
    /// representative switches.
    pub switch_margin: f64,
    /// Share of the arbitration budget the debate may use, as `num / den`.
    pub budget_num: u64,
    pub budget_den: u64,
}

impl Default for DebateParams {
    fn default() -> Self {
        Self {
            switch_margin: 0.1,
            budget_num: 7,
            budget_den: 10,
        }
    }
}

/// Each cluster's leader, carrying the cluster's solution. Costs one report
/// message per cluster, sent concurrently.
///
/// # Errors
///
/// [`HacnError::InvalidInput`] when a solution has no matching cluster.
pub fn select_representatives(
    solutions: &[ClusterSolution],
    clusters: &[Cluster],
    net: &mut Network,
) -> Result<Vec<Representative>> {
    let reps = solutions
        .iter()
        .map(|s| {
            let cluster = clusters
                .iter()
                .find(|c| c.id == s.cluster)
                .ok_or_else(|| HacnError::InvalidInput(format!("no cluster {}", s.cluster)))?;
            Ok(Representative {
                agent: cluster.leader,
                cluster: s.cluster,
                solution: s.candidate,
                backing: s.backing(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    net.broadcast(Tier::Tier2, reps.len() as u64);
    Ok(reps)
}

/// Rounds that fit in the debate share of `tau` after `elapsed` ticks,
/// clamped to `1..=num_reprs`.
pub fn calc_debate_rounds(num_reprs: usize, tau: u64, elapsed: u64, round_cost: u64, params: &DebateParams) -> u32 {
    let budget = u128::from(tau) * u128::from(params.budget_num);
    let used = u128::from(elapsed) * u128::from(params.budget_den);
    let per_round = u128::from(round_cost.max(1)) * u128::from(params.budget_den);
    let fit = budget.saturating_sub(used) / per_round;
    let ceiling = num_reprs.max(1) as u128;
    fit.clamp(1, ceiling) as u32
}

/// Adopt the strongest opposing argument if it clears the switch margin.
/// `counter` must not contain arguments for `rep`'s own solution. Equal
/// strengths keep the current solution.
pub fn counter_refine(rep: &Representative, own: &Argument, counter: &[Argument], margin: f64) -> Representative {
    debug_assert!(counter.iter().all(|a| a.for_candidate != rep.solution));
    let best = counter.iter().max_by(|a, b| {
        a.strength
            .total_cmp(&b.strength)
            .then(b.for_candidate.cmp(&a.for_candidate))
    });
    match best {
        Some(s) if s.strength > own.strength * (1.0 + margin) => Representative {
            solution: s.for_candidate,
            backing: s.strength,
            ..rep.clone()
        },
        _ => rep.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub round: u32,
    pub rep: AgentId,
    pub candidate: CandidateId,
    pub strength: f64,
    pub switched_to: Option<CandidateId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DebateOutcome {
    /// Final solution of every representative, in input order, duplicates kept.
    pub solutions: Vec<CandidateId>,
    pub representatives: Vec<Representative>,
    pub planned_rounds: u32,
    pub rounds: u32,
    pub switches: u32,
    pub transcript: Vec<TranscriptEntry>,
}

impl DebateOutcome {
    pub fn export_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.transcript {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Where the arbitration budget starts and how large it is.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub start: u64,
    pub tau: u64,
}

/// Run the representative debate.
///
/// A round runs only if it would finish within the debate share of the
/// budget; debate also ends early once every representative holds the same
/// solution. Each round costs one argument per representative, exchanged
/// concurrently, plus the cross-evaluation.
pub fn debate(
    reps: &[Representative],
    roster: &Roster,
    memory: &GlobalMemory,
    budget: Budget,
    params: &DebateParams,
    net: &mut Network,
) -> DebateOutcome {
    assert!(!reps.is_empty(), "debate needs at least one representative");
    let round_cost = net.clock.costs().round_cost();
    let planned = calc_debate_rounds(reps.len(), budget.tau, net.clock.elapsed(budget.start), round_cost, params);

    let norm = reps.iter().map(|r| r.backing).fold(0.0, f64::max);
    let norm = if norm > 0.0 { norm } else { 1.0 };
    let mut current: Vec<Representative> = reps
        .iter()
        .map(|r| Representative {
            backing: r.backing / norm,
            ..r.clone()
        })
        .collect();
    let accuracy: Vec<f64> = reps
        .iter()
        .map(|r| roster.get(r.agent).map_or(0.0, |a| memory.accuracy_of(a)))
        .collect();

    let mut transcript = Vec::new();
    let mut rounds = 0;
    let mut switches = 0;
    while rounds < planned {
        if current.iter().all(|r| r.solution == current[0].solution) {
            break;
        }
        let elapsed = net.clock.elapsed(budget.start);
        if exceeds_fraction(elapsed + round_cost, budget.tau, params.budget_num, params.budget_den) {
            break;
        }
        rounds += 1;
        net.broadcast(Tier::Tier2, current.len() as u64);
        net.clock.advance(ClockEvent::DebateRound);

        let args: Vec<Argument> = current
            .iter()
            .zip(&accuracy)
            .map(|(r, h)| Argument {
                author: r.agent,
                for_candidate: r.solution,
                strength: (r.backing * h).clamp(0.0, 1.0),
            })
            .collect();
        // strongest argument per candidate, ties to the earlier author
        let mut by_candidate: BTreeMap<CandidateId, Argument> = BTreeMap::new();
        for a in &args {
            by_candidate
                .entry(a.for_candidate)
                .and_modify(|best| {
                    if a.strength > best.strength {
                        *best = *a;
                    }
                })
                .or_insert(*a);
        }
        current = current
            .iter()
            .zip(&args)
            .map(|(r, own)| {
                let counter: Vec<Argument> = by_candidate
                    .values()
                    .filter(|a| a.for_candidate != r.solution)
                    .copied()
                    .collect();
                let next = counter_refine(r, own, &counter, params.switch_margin);
                let switched = next.solution != r.solution;
                switches += u32::from(switched);
                transcript.push(TranscriptEntry {
                    round: rounds,
                    rep: r.agent,
                    candidate: own.for_candidate,
                    strength: own.strength,
                    switched_to: switched.then_some(next.solution),
                });
                next
            })
            .collect();
    }

    DebateOutcome {
        solutions: current.iter().map(|r| r.solution).collect(),
        representatives: current,
        planned_rounds: planned,
        rounds,
        switches,
        transcript,
    }
}

/// Accept a candidate early when its share of total cluster backing reaches
/// `theta`. Dissenting solutions come back as the minority record.
pub fn partial_consensus(
    solutions: &[ClusterSolution],
    theta: f64,
) -> Option<(CandidateId, Vec<ClusterSolution>)> {
    let mut backing: BTreeMap<CandidateId, f64> = BTreeMap::new();
    for s in solutions {
        *backing.entry(s.candidate).or_default() += s.backing();
    }
    let total: f64 = backing.values().sum();
    if total <= 0.0 {
        return None;
    }
    let (&winner, &top) = backing
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(a.0)))?;
    if top / total < theta {
        return None;
    }
    let minority = solutions
        .iter()
        .filter(|s| s.candidate != winner)
        .cloned()
        .collect();
    Some((winner, minority))
}
