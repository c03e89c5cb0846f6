use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Candidate, CandidateId, Task, TaskId};
use crate::error::{FieldError, HacnError, Result};
use crate::math::mix_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskGenConfig {
    /// Candidate solutions offered per task.
    pub candidates: usize,
    pub complexity_min: f64,
    pub complexity_max: f64,
    /// τ is drawn uniformly from `[deadline_min, deadline_max]` ticks.
    pub deadline_min: u64,
    pub deadline_max: u64,
    pub budget_min: f64,
    pub budget_max: f64,
    /// Upper bound on the latent quality of every wrong candidate; the correct
    /// one has quality 1.
    pub distractor_quality: f64,
    /// Draw every cost, including the correct candidate's, from
    /// `[0.5, 2] × budget` so that often nothing is affordable.
    pub adversarial_costs: bool,
}

impl Default for TaskGenConfig {
    fn default() -> Self {
        Self {
            candidates: 8,
            complexity_min: 0.2,
            complexity_max: 0.8,
            deadline_min: 200,
            deadline_max: 200,
            budget_min: 5.0,
            budget_max: 10.0,
            distractor_quality: 0.8,
            adversarial_costs: false,
        }
    }
}

impl TaskGenConfig {
    pub fn field_errors(&self, prefix: &str) -> Vec<FieldError> {
        let mut errs = Vec::new();
        let f = |name: &str| format!("{prefix}{name}");
        if self.candidates == 0 {
            errs.push(FieldError::new(f("candidates"), "must be at least 1"));
        }
        if !(0.0 <= self.complexity_min
            && self.complexity_min <= self.complexity_max
            && self.complexity_max <= 1.0)
        {
            errs.push(FieldError::new(
                f("complexity_min"),
                "need 0 <= complexity_min <= complexity_max <= 1",
            ));
        }
        if self.deadline_min < 1 || self.deadline_min > self.deadline_max {
            errs.push(FieldError::new(
                f("deadline_min"),
                "need 1 <= deadline_min <= deadline_max",
            ));
        }
        if !(0.0 <= self.budget_min && self.budget_min <= self.budget_max)
            || !self.budget_max.is_finite()
        {
            errs.push(FieldError::new(
                f("budget_min"),
                "need 0 <= budget_min <= budget_max < inf",
            ));
        }
        if !(0.0..=1.0).contains(&self.distractor_quality) {
            errs.push(FieldError::new(f("distractor_quality"), "must lie in [0, 1]"));
        }
        errs
    }
}

/// A task together with its simulator-private ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskCase {
    pub task: Task,
    pub candidates: Vec<Candidate>,
    /// Latent quality per candidate, aligned with `candidates`.
    pub qualities: Vec<f64>,
    pub truth: CandidateId,
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

pub fn generate_tasks(
    cfg: &TaskGenConfig,
    dimension: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<TaskCase>> {
    let errs = cfg.field_errors("tasks.");
    if !errs.is_empty() {
        return Err(HacnError::Config(errs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x5441_534b));
    (0..count)
        .map(|t| {
            let required = (0..dimension).map(|_| rng.random::<f64>()).collect();
            let complexity = uniform(&mut rng, cfg.complexity_min, cfg.complexity_max);
            let deadline = rng.random_range(cfg.deadline_min..=cfg.deadline_max);
            let budget = uniform(&mut rng, cfg.budget_min, cfg.budget_max);
            let task = Task::new(TaskId(t as u32), required, complexity, deadline, budget)?;

            let truth = rng.random_range(0..cfg.candidates);
            let mut candidates = Vec::with_capacity(cfg.candidates);
            let mut qualities = Vec::with_capacity(cfg.candidates);
            for j in 0..cfg.candidates {
                let feature = (0..dimension).map(|_| rng.random::<f64>()).collect();
                let cost = if cfg.adversarial_costs {
                    uniform(&mut rng, 0.5 * budget, 2.0 * budget)
                } else if j == truth {
                    uniform(&mut rng, 0.0, budget)
                } else {
                    uniform(&mut rng, 0.0, 1.2 * budget)
                };
                let quality = if j == truth {
                    1.0
                } else {
                    uniform(&mut rng, 0.0, cfg.distractor_quality)
                };
                candidates.push(Candidate {
                    id: CandidateId(j as u32),
                    feature,
                    cost,
                });
                qualities.push(quality);
            }
            Ok(TaskCase {
                task,
                candidates,
                qualities,
                truth: CandidateId(truth as u32),
            })
        })
        .collect()
}
