use serde::Serialize;
use thiserror::Error;

use crate::workflow::{Action, Phase};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by transports to pick a status code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    Client,
    NotFound,
    Conflict,
    Server,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate {kind} id {id:?}")]
    Duplicate { kind: &'static str, id: String },

    #[error("unknown {kind} {id:?}")]
    Unknown { kind: &'static str, id: String },

    #[error("gpa {gpa} outside [0, {max}]")]
    GpaOutOfRange { gpa: f64, max: f64 },

    #[error("missing required field {0:?}")]
    MissingField(&'static str),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("proposal {id} is {status}; cannot {operation}")]
    ProposalState {
        id: String,
        status: String,
        operation: &'static str,
    },

    #[error("ballot has {got} choices, below minimum of {min}")]
    BallotTooShort { got: usize, min: usize },

    #[error("ballot lists proposal {0} more than once")]
    BallotDuplicate(String),

    #[error("ballot references proposal {0} which is not approved")]
    BallotUnapproved(String),

    #[error("{action:?} is not allowed during {phase:?}")]
    Gate { action: Action, phase: Phase },

    #[error("cannot move from {from:?} to {to:?}")]
    PhaseTransition { from: Phase, to: Phase },

    #[error("allocation is finalized")]
    Finalized,

    #[error("no allocation exists yet")]
    NoAllocation,

    #[error("allocation cannot be finalized: {}", .0.join("; "))]
    FinalizeRejected(Vec<String>),

    #[error("instance exceeds exact-solver limits: {0}")]
    OracleLimit(String),

    #[error("advisor capacity {capacity} below {groups} groups (shortfall {shortfall})")]
    AdvisorCapacity {
        capacity: usize,
        groups: usize,
        shortfall: usize,
    },

    #[error("advisor {advisor} already at max load {max_load}")]
    AdvisorOverloaded { advisor: String, max_load: usize },

    #[error("recommend score {0} outside 0..=10")]
    ScoreOutOfRange(i64),

    #[error("version conflict: expected {expected}, found {found}")]
    VersionConflict { expected: u64, found: u64 },

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Unknown { .. } | Error::NoAllocation => ErrorClass::NotFound,
            Error::Gate { .. }
            | Error::PhaseTransition { .. }
            | Error::VersionConflict { .. }
            | Error::Finalized
            | Error::ProposalState { .. }
            | Error::Duplicate { .. } => ErrorClass::Conflict,
            Error::Io(_) => ErrorClass::Server,
            _ => ErrorClass::Client,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Duplicate { .. } => "duplicate",
            Error::Unknown { .. } => "unknown_reference",
            Error::GpaOutOfRange { .. } => "gpa_out_of_range",
            Error::MissingField(_) => "missing_field",
            Error::Invalid(_) => "invalid",
            Error::ProposalState { .. } => "proposal_state",
            Error::BallotTooShort { .. } => "ballot_below_minimum",
            Error::BallotDuplicate(_) => "ballot_duplicate",
            Error::BallotUnapproved(_) => "ballot_unapproved",
            Error::Gate { .. } => "phase_gate",
            Error::PhaseTransition { .. } => "phase_transition",
            Error::Finalized => "finalized",
            Error::NoAllocation => "no_allocation",
            Error::FinalizeRejected(_) => "finalize_rejected",
            Error::OracleLimit(_) => "oracle_limit",
            Error::AdvisorCapacity { .. } => "advisor_capacity",
            Error::AdvisorOverloaded { .. } => "advisor_overloaded",
            Error::ScoreOutOfRange(_) => "score_out_of_range",
            Error::VersionConflict { .. } => "version_conflict",
            Error::Integrity(_) => "integrity",
            Error::Schema(_) => "schema",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }

    /// Structured payload describing the offending entities.
    pub fn details(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Error::Duplicate { kind, id } | Error::Unknown { kind, id } => {
                json!({ "kind": kind, "id": id })
            }
            Error::Gate { action, phase } => json!({ "action": action, "phase": phase }),
            Error::PhaseTransition { from, to } => json!({ "from": from, "to": to }),
            Error::VersionConflict { expected, found } => {
                json!({ "expected": expected, "found": found })
            }
            Error::FinalizeRejected(v) => json!({ "violations": v }),
            Error::AdvisorCapacity {
                capacity,
                groups,
                shortfall,
            } => json!({ "capacity": capacity, "groups": groups, "shortfall": shortfall }),
            Error::BallotTooShort { got, min } => json!({ "got": got, "min": min }),
            Error::BallotDuplicate(p) | Error::BallotUnapproved(p) => json!({ "proposal_id": p }),
            _ => serde_json::Value::Null,
        }
    }
}
