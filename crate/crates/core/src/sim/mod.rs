//! Synthetic agents and tasks.
//!
//! This is the only place that knows an agent's latent reliability, each
//! candidate's latent quality and the correct answer of a task. The tier
//! engines see agents through [`crate::tier1::AgentBehavior`] and tasks through
//! the protocol-visible [`crate::domain::Task`] and [`crate::domain::Candidate`].
//!
//! How an agent picks a candidate and how confident it is are modelling
//! choices of this simulator: a softmax over `reliability × relevance ×
//! quality` for selection and `reliability + noise` for confidence.

mod behavior;
mod population;
mod scenario;

pub use behavior::{propose, revise, AgentModel, ForcedAgreement, SimulatedAgents};
pub use population::{
    generate_population, AgentSpec, AgentStatus, PopulationConfig, ReliabilityDist,
};
pub use scenario::{generate_tasks, TaskCase, TaskGenConfig};
