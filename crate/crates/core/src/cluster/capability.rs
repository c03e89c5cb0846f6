use crate::domain::{AgentProfile, GlobalMemory, Task};
use crate::math::unit_similarity;

/// `[expertise.., history, relevance]`, every entry in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapabilityVector(pub Vec<f64>);

impl CapabilityVector {
    pub fn relevance(&self) -> f64 {
        *self.0.last().expect("capability vector has a relevance entry")
    }

    pub fn history(&self) -> f64 {
        self.0[self.0.len() - 2]
    }
}

/// Cosine of expertise and task requirement, mapped to `[0, 1]`.
pub fn relevance(expertise: &[f64], requirement: &[f64]) -> f64 {
    unit_similarity(expertise, requirement)
}

pub fn capability_vector(agent: &AgentProfile, task: &Task, memory: &GlobalMemory) -> CapabilityVector {
    let mut v = Vec::with_capacity(agent.expertise.len() + 2);
    v.extend_from_slice(&agent.expertise);
    v.push(memory.accuracy_of(agent));
    v.push(relevance(&agent.expertise, &task.required_expertise));
    CapabilityVector(v)
}
