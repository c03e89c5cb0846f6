//! Dynamic cluster formation.
//!
//! Active agents are embedded as capability vectors and split into
//! `k = ⌊√n⌋` groups by size-constrained k-means. A clustering whose
//! silhouette falls below the quality threshold is retried with one more or
//! one fewer cluster, and the best attempt wins.
//!
//! The upper size bound adapts to the population:
//! `size_max(n) = max(5, ⌈1.5·n / ⌊√n⌋⌉)`. For `n ≤ 25` this is the classic
//! 3 to 5 member band. For large populations it lets `⌊√n⌋` clusters cover
//! everyone (31 clusters of about 32 agents at `n = 1000`).

mod capability;
mod kmeans;
mod leader;
mod silhouette;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use capability::{capability_vector, relevance, CapabilityVector};
pub use leader::{leader_score, select_leader, LeaderWeights};
pub use silhouette::silhouette;

use crate::domain::{AgentId, ClusterId, GlobalMemory, Roster, Task};
use crate::error::{FieldError, HacnError, Result};
use crate::math::{cosine, mix_seed};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: ClusterId,
    /// Sorted ascending.
    pub members: Vec<AgentId>,
    pub leader: AgentId,
    pub centroid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub sz_min: usize,
    /// Fixed upper bound; `None` uses the adaptive [`size_max`].
    pub sz_max: Option<usize>,
    pub iter_max: usize,
    /// Minimum acceptable silhouette.
    pub quality_threshold: f64,
    pub max_attempts: usize,
    pub leader: LeaderWeights,
    /// Cosine distance between consecutive task requirements that forces a
    /// fresh clustering.
    pub reform_drift: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            sz_min: 3,
            sz_max: None,
            iter_max: 50,
            quality_threshold: 0.25,
            max_attempts: 5,
            leader: LeaderWeights::default(),
            reform_drift: 0.5,
        }
    }
}

impl ClusterConfig {
    pub fn field_errors(&self, prefix: &str) -> Vec<FieldError> {
        let mut errs = Vec::new();
        let f = |name: &str| format!("{prefix}{name}");
        if self.sz_min == 0 {
            errs.push(FieldError::new(f("sz_min"), "must be at least 1"));
        }
        if let Some(max) = self.sz_max {
            if max < self.sz_min {
                errs.push(FieldError::new(f("sz_max"), "must be >= sz_min"));
            }
        }
        if self.iter_max == 0 {
            errs.push(FieldError::new(f("iter_max"), "must be at least 1"));
        }
        if self.max_attempts == 0 {
            errs.push(FieldError::new(f("max_attempts"), "must be at least 1"));
        }
        if !(-1.0..=1.0).contains(&self.quality_threshold) {
            errs.push(FieldError::new(f("quality_threshold"), "must lie in [-1, 1]"));
        }
        if !(0.0..=2.0).contains(&self.reform_drift) {
            errs.push(FieldError::new(f("reform_drift"), "must lie in [0, 2]"));
        }
        let w = &self.leader;
        if [w.success, w.expertise, w.availability].iter().any(|x| !(*x >= 0.0)) {
            errs.push(FieldError::new(f("leader"), "weights must be non-negative"));
        } else if (w.sum() - 1.0).abs() > 1e-9 {
            errs.push(FieldError::new(f("leader"), "weights must sum to 1"));
        }
        errs
    }

    pub fn upper_bound(&self, n: usize) -> usize {
        self.sz_max.unwrap_or_else(|| size_max(n))
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `⌊√n⌋`.
pub fn initial_cluster_count(n: usize) -> Result<usize> {
    if n < 3 {
        return Err(HacnError::TooFewAgents { needed: 3, found: n });
    }
    Ok(isqrt(n).max(1))
}

/// Adaptive upper bound on cluster size, `max(5, ⌈1.5·n / ⌊√n⌋⌉)`.
pub fn size_max(n: usize) -> usize {
    let k = isqrt(n).max(1);
    5usize.max((3 * n).div_ceil(2 * k))
}

/// The outcome of [`form_clusters`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    pub silhouette: f64,
    /// `k` of the first attempt.
    pub initial_k: usize,
    pub attempts: usize,
    /// Assignment passes summed over all attempts.
    pub passes: usize,
}

impl Clustering {
    pub fn mean_size(&self) -> f64 {
        if self.clusters.is_empty() {
            return 0.0;
        }
        let total: usize = self.clusters.iter().map(|c| c.members.len()).sum();
        total as f64 / self.clusters.len() as f64
    }
}

fn clamp_k(k: usize, n: usize, cfg: &ClusterConfig) -> usize {
    let lo = n.div_ceil(cfg.upper_bound(n)).max(1);
    let hi = (n / cfg.sz_min.max(1)).max(1);
    k.clamp(lo.min(hi), hi)
}

/// Group the roster's online agents for `task`.
///
/// # Errors
///
/// [`HacnError::TooFewActive`] below three online agents, and
/// [`HacnError::Config`] for an invalid `cfg`.
pub fn form_clusters(
    roster: &Roster,
    task: &Task,
    memory: &GlobalMemory,
    cfg: &ClusterConfig,
    seed: u64,
) -> Result<Clustering> {
    let errs = cfg.field_errors("cluster.");
    if !errs.is_empty() {
        return Err(HacnError::Config(errs));
    }
    let active: Vec<AgentId> = roster.online().map(|a| a.id).collect();
    let n = active.len();
    if n < 3 {
        return Err(HacnError::TooFewActive { needed: 3, found: n });
    }
    let vectors: Vec<Vec<f64>> = roster
        .online()
        .map(|a| capability_vector(a, task, memory).0)
        .collect();
    let cap = cfg.upper_bound(n);

    let initial_k = clamp_k(initial_cluster_count(n)?, n, cfg);
    let mut k = initial_k;
    let mut tried = Vec::new();
    let mut best: Option<(f64, kmeans::Partition)> = None;
    let mut passes = 0;
    while tried.len() < cfg.max_attempts {
        tried.push(k);
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, k as u64));
        let part = kmeans::constrained_kmeans(&vectors, k, cfg.sz_min, cap, cfg.iter_max, &mut rng);
        passes += part.passes;
        let score = silhouette(&part.labels, &vectors);
        let mean_size = n as f64 / part.k as f64;
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, part));
        }
        if score >= cfg.quality_threshold {
            break;
        }
        let target = n as f64 / k as f64;
        let next = if mean_size > target { k + 1 } else { k.saturating_sub(1) };
        let next = clamp_k(next, n, cfg);
        if tried.contains(&next) {
            break;
        }
        k = next;
    }
    let (score, part) = best.expect("at least one attempt runs");

    let mut clusters = Vec::with_capacity(part.k);
    for c in 0..part.k {
        let idx: Vec<usize> = (0..n).filter(|&i| part.labels[i] == c).collect();
        let members: Vec<AgentId> = idx.iter().map(|&i| active[i]).collect();
        let mut centroid = vec![0.0; vectors[0].len()];
        for &i in &idx {
            for (c, x) in centroid.iter_mut().zip(&vectors[i]) {
                *c += x / idx.len() as f64;
            }
        }
        let leader = select_leader(&members, roster, memory, task, &cfg.leader);
        clusters.push(Cluster {
            id: ClusterId(c as u32),
            members,
            leader,
            centroid,
        });
    }
    Ok(Clustering {
        clusters,
        silhouette: score,
        initial_k,
        attempts: tried.len(),
        passes,
    })
}

/// Why a clustering was rebuilt.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReformReason {
    LowQuality,
    TaskDrift,
    MembershipChanged,
}

/// Decide whether `previous` still fits `task`.
///
/// Returns `None` when the clustering is kept, otherwise the trigger. Besides
/// low silhouette and requirement drift, a change in the online population
/// also forces a rebuild, since clusters must partition the active agents.
pub fn reform_trigger(
    previous: &Clustering,
    previous_requirement: &[f64],
    task: &Task,
    roster: &Roster,
    cfg: &ClusterConfig,
) -> Option<ReformReason> {
    if previous.silhouette < cfg.quality_threshold {
        return Some(ReformReason::LowQuality);
    }
    if 1.0 - cosine(previous_requirement, &task.required_expertise) > cfg.reform_drift {
        return Some(ReformReason::TaskDrift);
    }
    let mut clustered: Vec<AgentId> = previous
        .clusters
        .iter()
        .flat_map(|c| c.members.iter().copied())
        .collect();
    clustered.sort();
    let online: Vec<AgentId> = roster.online().map(|a| a.id).collect();
    (clustered != online).then_some(ReformReason::MembershipChanged)
}

/// Rebuild the clustering when [`reform_trigger`] fires; `Ok(None)` means
/// `previous` stays in place.
pub fn reform_clusters(
    previous: &Clustering,
    previous_requirement: &[f64],
    task: &Task,
    roster: &Roster,
    memory: &GlobalMemory,
    cfg: &ClusterConfig,
    seed: u64,
) -> Result<Option<(Clustering, ReformReason)>> {
    match reform_trigger(previous, previous_requirement, task, roster, cfg) {
        None => Ok(None),
        Some(reason) => Ok(Some((form_clusters(roster, task, memory, cfg, seed)?, reason))),
    }
}
