use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FieldError, HacnError, Result};
use crate::protocol::{min_deadline, ProtocolParams};
use crate::sim::{AgentModel, PopulationConfig, TaskGenConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for `hacn.csv` and `baseline.csv`.
    pub dir: Option<PathBuf>,
    /// Also write `memory.jsonl` and `transcript.jsonl`.
    pub dumps: bool,
}

/// A complete experiment. Every field has a default, so an empty file is a
/// valid configuration.
///
/// ```toml
/// seed = 7
/// task_count = 25
/// baseline = true
///
/// [population]
/// agents = 100
/// dropout_rate = 0.1
///
/// [protocol.cluster]
/// quality_threshold = 0.25
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Run seed. Population, tasks, agent streams and the engine derive their
    /// own seeds from it, so `population.seed` must stay unset.
    pub seed: u64,
    pub task_count: usize,
    /// Run the fully-connected baseline on the same inputs.
    pub baseline: bool,
    pub population: PopulationConfig,
    pub tasks: TaskGenConfig,
    pub agents: AgentModel,
    pub protocol: ProtocolParams,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            task_count: 25,
            baseline: false,
            population: PopulationConfig::default(),
            tasks: TaskGenConfig::default(),
            agents: AgentModel::default(),
            protocol: ProtocolParams::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            HacnError::Config(vec![FieldError::new("<file>", e.message().to_string())])
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HacnError::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn field_errors(&self) -> Vec<FieldError> {
        let mut errs = self.population.field_errors("population.");
        if self.population.seed != 0 {
            errs.push(FieldError::new(
                "population.seed",
                "derived from the top-level seed; set `seed` instead",
            ));
        }
        errs.extend(self.tasks.field_errors("tasks."));
        errs.extend(self.protocol.field_errors("protocol."));
        if self.task_count == 0 {
            errs.push(FieldError::new("task_count", "must be at least 1"));
        }
        let floor = min_deadline(&self.protocol.costs, &self.protocol.debate);
        if self.tasks.deadline_min < floor {
            errs.push(FieldError::new(
                "tasks.deadline_min",
                format!("must be at least {floor} ticks for the configured costs"),
            ));
        }
        let m = &self.agents;
        if !(m.beta_sel >= 0.0 && m.beta_sel.is_finite()) {
            errs.push(FieldError::new("agents.beta_sel", "must be finite and >= 0"));
        }
        if !(m.confidence_noise >= 0.0 && m.confidence_noise.is_finite()) {
            errs.push(FieldError::new("agents.confidence_noise", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&m.adversarial_confidence) {
            errs.push(FieldError::new("agents.adversarial_confidence", "must lie in [0, 1]"));
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.field_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(HacnError::Config(errs))
        }
    }
}
