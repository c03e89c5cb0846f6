use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::{AgentId, AgentProfile};
use crate::error::{FieldError, HacnError, Result};
use crate::math::mix_seed;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentStatus {
    Active,
    Failed,
    Adversarial,
}

/// A simulated agent: the protocol-visible profile plus its latent traits.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSpec {
    pub profile: AgentProfile,
    /// Probability-like competence; drives proposal quality. Never shown to
    /// the protocol.
    pub reliability: f64,
    pub status: AgentStatus,
}

impl AgentSpec {
    pub fn id(&self) -> AgentId {
        self.profile.id
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityDist {
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    pub agents: usize,
    /// Expertise dimension `d`.
    pub dimension: usize,
    pub reliability: ReliabilityDist,
    /// Spread of the initial tracked accuracy around the latent reliability.
    pub history_noise: f64,
    pub dropout_rate: f64,
    pub adversarial_rate: f64,
    pub seed: u64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            agents: 100,
            dimension: 2,
            reliability: ReliabilityDist {
                mean: 0.8,
                stddev: 0.1,
            },
            history_noise: 0.05,
            dropout_rate: 0.0,
            adversarial_rate: 0.0,
            seed: 0,
        }
    }
}

impl PopulationConfig {
    pub fn field_errors(&self, prefix: &str) -> Vec<FieldError> {
        let mut errs = Vec::new();
        let f = |name: &str| format!("{prefix}{name}");
        if self.agents < 3 {
            errs.push(FieldError::new(f("agents"), "must be at least 3"));
        }
        if self.dimension == 0 {
            errs.push(FieldError::new(f("dimension"), "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.reliability.mean) {
            errs.push(FieldError::new(f("reliability.mean"), "must lie in [0, 1]"));
        }
        if !(self.reliability.stddev >= 0.0) || !self.reliability.stddev.is_finite() {
            errs.push(FieldError::new(f("reliability.stddev"), "must be finite and >= 0"));
        }
        if !(self.history_noise >= 0.0) || !self.history_noise.is_finite() {
            errs.push(FieldError::new(f("history_noise"), "must be finite and >= 0"));
        }
        for (name, rate) in [
            ("dropout_rate", self.dropout_rate),
            ("adversarial_rate", self.adversarial_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                errs.push(FieldError::new(f(name), "must lie in [0, 1]"));
            }
        }
        if self.dropout_rate + self.adversarial_rate > 1.0 {
            errs.push(FieldError::new(
                f("dropout_rate"),
                "dropout_rate + adversarial_rate must not exceed 1",
            ));
        }
        errs
    }
}

fn floor_count(rate: f64, n: usize) -> usize {
    // tolerate representation error such as 0.29 * 100 = 28.999999999999996
    ((rate * n as f64) + 1e-9).floor() as usize
}

/// Sample a normal truncated to `[0, 1]` by rejection, falling back to
/// clipping if the mass inside the interval is tiny.
fn truncated_normal(dist: &Normal<f64>, rng: &mut impl Rng) -> f64 {
    for _ in 0..64 {
        let x = dist.sample(rng);
        if (0.0..=1.0).contains(&x) {
            return x;
        }
    }
    dist.sample(rng).clamp(0.0, 1.0)
}

/// Build `n` agents. Exactly `floor(dropout_rate·n)` agents are Failed and
/// `floor(adversarial_rate·n)` Adversarial, chosen by a seeded shuffle.
pub fn generate_population(cfg: &PopulationConfig) -> Result<Vec<AgentSpec>> {
    if cfg.agents < 3 {
        return Err(HacnError::TooFewAgents {
            needed: 3,
            found: cfg.agents,
        });
    }
    let errs = cfg.field_errors("population.");
    if !errs.is_empty() {
        return Err(HacnError::Config(errs));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0x504f_5055));
    let reliability = Normal::new(cfg.reliability.mean, cfg.reliability.stddev)
        .map_err(|e| HacnError::InvalidInput(e.to_string()))?;
    let noise = Normal::new(0.0, cfg.history_noise)
        .map_err(|e| HacnError::InvalidInput(e.to_string()))?;

    let mut agents: Vec<AgentSpec> = (0..cfg.agents)
        .map(|i| {
            let expertise = (0..cfg.dimension).map(|_| rng.random::<f64>()).collect();
            let rel = truncated_normal(&reliability, &mut rng);
            let history = (rel + noise.sample(&mut rng)).clamp(0.0, 1.0);
            let availability = rng.random::<f64>();
            AgentSpec {
                profile: AgentProfile {
                    id: AgentId(i as u32),
                    expertise,
                    history,
                    availability,
                    online: true,
                },
                reliability: rel,
                status: AgentStatus::Active,
            }
        })
        .collect();

    let failed = floor_count(cfg.dropout_rate, cfg.agents);
    let adversarial = floor_count(cfg.adversarial_rate, cfg.agents);
    let mut order: Vec<usize> = (0..cfg.agents).collect();
    order.shuffle(&mut rng);
    for (rank, &idx) in order.iter().enumerate() {
        let status = if rank < failed {
            AgentStatus::Failed
        } else if rank < failed + adversarial {
            AgentStatus::Adversarial
        } else {
            continue;
        };
        agents[idx].status = status;
        agents[idx].profile.online = status != AgentStatus::Failed;
    }
    Ok(agents)
}
