//! Per-task metrics and the complexity analysis used by sweeps.

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineOutcome;
use crate::domain::{CandidateId, EscalationPath, TaskId};
use crate::error::{HacnError, Result};
use crate::protocol::TaskOutcome;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Hacn,
    Baseline,
}

/// One row of output: one engine on one task. Flat so it maps onto a CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub engine: Engine,
    pub task: TaskId,
    pub agents: usize,
    pub tier1_messages: u64,
    pub tier2_messages: u64,
    pub tier3_messages: u64,
    pub baseline_messages: u64,
    pub total_messages: u64,
    pub convergence_ticks: u64,
    pub deadline: u64,
    pub rounds: u32,
    pub clusters_formed: usize,
    pub mean_agents_per_cluster: f64,
    pub decision: CandidateId,
    /// Filled in by the harness, which is the only party that knows the truth.
    pub correct: bool,
    pub escalation_path: EscalationPath,
}

impl MetricsRecord {
    pub fn from_hacn(task: TaskId, agents: usize, deadline: u64, out: &TaskOutcome) -> Self {
        Self {
            engine: Engine::Hacn,
            task,
            agents,
            tier1_messages: out.messages.tier1,
            tier2_messages: out.messages.tier2,
            tier3_messages: out.messages.tier3,
            baseline_messages: out.messages.baseline,
            total_messages: out.messages.total(),
            convergence_ticks: out.ticks,
            deadline,
            rounds: out.rounds(),
            clusters_formed: out.clusters,
            mean_agents_per_cluster: out.mean_cluster_size,
            decision: out.decision,
            correct: false,
            escalation_path: out.path,
        }
    }

    pub fn from_baseline(task: TaskId, agents: usize, deadline: u64, out: &BaselineOutcome) -> Self {
        Self {
            engine: Engine::Baseline,
            task,
            agents,
            tier1_messages: out.messages.tier1,
            tier2_messages: out.messages.tier2,
            tier3_messages: out.messages.tier3,
            baseline_messages: out.messages.baseline,
            total_messages: out.messages.total(),
            convergence_ticks: out.ticks,
            deadline,
            rounds: out.rounds,
            clusters_formed: 0,
            mean_agents_per_cluster: 0.0,
            decision: out.decision,
            correct: false,
            escalation_path: EscalationPath::FullMesh,
        }
    }
}

/// Power-law fit `messages ≈ e^intercept · n^slope`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln n, ln messages)`.
///
/// # Errors
///
/// [`HacnError::DegenerateSeries`] with fewer than five distinct `n` or any
/// non-positive value.
pub fn complexity_fit(series: &[(f64, f64)]) -> Result<PowerFit> {
    let mut distinct: Vec<f64> = series.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(HacnError::DegenerateSeries(format!(
            "need at least 5 distinct n, got {}",
            distinct.len()
        )));
    }
    if series.iter().any(|&(n, m)| !(n > 0.0 && m > 0.0)) {
        return Err(HacnError::DegenerateSeries("n and messages must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(n, m)| (n.ln(), m.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(PowerFit {
        slope,
        intercept,
        r_squared,
    })
}

/// `100 · (1 − hacn / baseline)`.
pub fn reduction_ratio(hacn: f64, baseline: f64) -> Result<f64> {
    if !(baseline > 0.0) {
        return Err(HacnError::ZeroBaseline);
    }
    Ok(100.0 * (1.0 - hacn / baseline))
}

/// Upper bound on one task's messages: every cluster runs all its voting
/// iterations, and every report and debate round happens.
pub fn message_bound(cluster_sizes: &[usize], max_iters: u32, debate_rounds: u32) -> u64 {
    let tier1: u64 = cluster_sizes
        .iter()
        .map(|&m| (m as u64) * (m as u64).saturating_sub(1))
        .sum();
    let k = cluster_sizes.len() as u64;
    u64::from(max_iters) * tier1 + k + k * u64::from(debate_rounds) + k
}
