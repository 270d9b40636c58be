//! Group formation.
//!
//! Students are seeded onto their first choice, oversubscribed groups are
//! drained into smaller groups, and groups that stay below the minimum size
//! are closed. The result is a near-final allocation that administrators
//! refine with previewed manual moves before finalizing it.
//!
//! Every cost in this module goes through [`objective::Problem`], which
//! indexes students and projects by sorted id and sums per-group terms in a
//! fixed order. Two allocations with the same groups therefore get
//! bit-identical objective values, whichever path computed them.

mod conflicts;
mod exact;
mod heuristic;
mod matching;
mod moves;
mod objective;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ballots::Ballot;
use crate::intake::Proposal;
use crate::model::{Organization, ProposalId, Student, StudentId};

pub use conflicts::{
    detect_conflicts, set_conflict_status, ConflictFlag, ConflictKind, ConflictStatus,
};
pub use exact::{exact_allocate, ExactLimits, ExactResult};
pub use heuristic::{allocate, initial_assignment, redistribute};
pub use matching::{seat_feasibility, SeatFeasibility};
pub use moves::{apply_move, finalize, what_if_move, MovePreview, SeatChange};
pub use objective::{objective, ObjectiveBreakdown};

/// Everything group formation looks at. Only approved proposals take part.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub students: Vec<Student>,
    pub proposals: Vec<Proposal>,
    #[serde(default)]
    pub organizations: Vec<Organization>,
    pub ballots: Vec<Ballot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveCause {
    Initial,
    OversubscribedDrain,
    GroupClosed,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub student_id: StudentId,
    pub from: Option<ProposalId>,
    pub to: Option<ProposalId>,
    pub cause: MoveCause,
    pub objective_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    OversizedGroup,
    UndersizedGroup,
    UnassignedStudent,
}

/// Warning derived from the current grouping.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AllocationFlag {
    pub kind: FlagKind,
    #[serde(default)]
    pub proposal_id: Option<ProposalId>,
    #[serde(default)]
    pub student_id: Option<StudentId>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Only open (nonempty) groups are listed.
    pub groups: BTreeMap<ProposalId, BTreeSet<StudentId>>,
    pub unassigned: BTreeSet<StudentId>,
    pub provenance: BTreeMap<StudentId, Vec<MoveRecord>>,
    pub objective: ObjectiveBreakdown,
    #[serde(default)]
    pub conflicts: Vec<ConflictFlag>,
    #[serde(default)]
    pub flags: Vec<AllocationFlag>,
    #[serde(default)]
    pub finalized: bool,
}

impl Allocation {
    pub fn group_of(&self, student: &StudentId) -> Option<&ProposalId> {
        self.groups
            .iter()
            .find(|(_, members)| members.contains(student))
            .map(|(p, _)| p)
    }

    pub fn contains(&self, student: &StudentId) -> bool {
        self.unassigned.contains(student) || self.group_of(student).is_some()
    }

    /// Moves performed by the heuristic (everything except initial and manual).
    pub fn heuristic_moves(&self, student: &StudentId) -> usize {
        self.provenance.get(student).map_or(0, |v| {
            v.iter()
                .filter(|m| {
                    matches!(
                        m.cause,
                        MoveCause::OversubscribedDrain | MoveCause::GroupClosed
                    )
                })
                .count()
        })
    }

    pub(crate) fn refresh_flags(&mut self, team_size_min: usize, team_size_max: usize) {
        let mut flags = Vec::new();
        for (p, members) in &self.groups {
            let n = members.len();
            if n > team_size_max {
                flags.push(AllocationFlag {
                    kind: FlagKind::OversizedGroup,
                    proposal_id: Some(p.clone()),
                    student_id: None,
                    message: format!("group {p} has {n} members, above maximum {team_size_max}"),
                });
            } else if n < team_size_min {
                flags.push(AllocationFlag {
                    kind: FlagKind::UndersizedGroup,
                    proposal_id: Some(p.clone()),
                    student_id: None,
                    message: format!("group {p} has {n} members, below minimum {team_size_min}"),
                });
            }
        }
        for s in &self.unassigned {
            flags.push(AllocationFlag {
                kind: FlagKind::UnassignedStudent,
                proposal_id: None,
                student_id: Some(s.clone()),
                message: format!("student {s} has no group"),
            });
        }
        self.flags = flags;
    }
}
