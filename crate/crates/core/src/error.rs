use std::fmt;

use thiserror::Error;

use crate::domain::ClusterId;

pub type Result<T, E = HacnError> = std::result::Result<T, E>;

/// A single rejected configuration field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum HacnError {
    #[error("need at least {needed} agents, got {found}")]
    TooFewAgents { needed: usize, found: usize },

    #[error("need at least {needed} active agents, found {found}")]
    TooFewActive { needed: usize, found: usize },

    #[error("candidate list is empty")]
    NoCandidates,

    #[error("cluster {0} has no active members")]
    EmptyCluster(ClusterId),

    #[error("total vote weight is zero")]
    ZeroWeight,

    #[error("invalid configuration: {}", join_fields(.0))]
    Config(Vec<FieldError>),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("baseline message count is zero")]
    ZeroBaseline,

    #[error("feasibility bonus requested for a solution that failed a check")]
    FailedCheck,

    #[error("run with {agents} agents failed: {source}")]
    Sweep {
        agents: usize,
        #[source]
        source: Box<HacnError>,
    },
}

fn join_fields(fields: &[FieldError]) -> String {
    fields
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
