use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Allocation, Instance};
use crate::error::{Error, Result};
use crate::model::{normalize_org_name, ExperienceStatus, ProposalId, StudentId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictKind {
    CurrentEmployment,
    PastEmployment,
    FamilyTie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictStatus {
    Open,
    Waived,
    Blocking,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConflictFlag {
    pub student_id: StudentId,
    pub proposal_id: ProposalId,
    pub kind: ConflictKind,
    pub matched_org: String,
    pub status: ConflictStatus,
}

/// Flags every (student, approved proposal) pair where the proposing
/// organization matches one of the student's employers or family ties.
/// Current jobs and internships start blocking; the rest start open.
pub fn detect_conflicts(instance: &Instance) -> Vec<ConflictFlag> {
    let org_names: HashMap<_, _> = instance
        .organizations
        .iter()
        .map(|o| (&o.id, (normalize_org_name(&o.name), o.name.as_str())))
        .collect();
    let mut flags = Vec::new();
    for student in &instance.students {
        let mut ties: Vec<(String, ConflictKind)> = student
            .work_history
            .iter()
            .map(|e| {
                let kind = match e.status {
                    ExperienceStatus::Current => ConflictKind::CurrentEmployment,
                    ExperienceStatus::Past => ConflictKind::PastEmployment,
                };
                (normalize_org_name(&e.organization), kind)
            })
            .collect();
        ties.extend(
            student
                .family_ties
                .iter()
                .map(|t| (normalize_org_name(t), ConflictKind::FamilyTie)),
        );
        for proposal in instance.proposals.iter().filter(|p| p.is_approved()) {
            let Some((norm, display)) = org_names.get(&proposal.form.org_id) else {
                continue;
            };
            for (tie, kind) in &ties {
                if tie == norm {
                    let status = match kind {
                        ConflictKind::CurrentEmployment => ConflictStatus::Blocking,
                        _ => ConflictStatus::Open,
                    };
                    flags.push(ConflictFlag {
                        student_id: student.id.clone(),
                        proposal_id: proposal.id.clone(),
                        kind: *kind,
                        matched_org: display.to_string(),
                        status,
                    });
                }
            }
        }
    }
    flags.sort();
    flags.dedup_by(|a, b| {
        (&a.student_id, &a.proposal_id, a.kind) == (&b.student_id, &b.proposal_id, b.kind)
    });
    flags
}

/// Records a reviewer decision on every flag for the pair.
pub fn set_conflict_status(
    allocation: &Allocation,
    student: &StudentId,
    proposal: &ProposalId,
    status: ConflictStatus,
) -> Result<Allocation> {
    if allocation.finalized {
        return Err(Error::Finalized);
    }
    let mut out = allocation.clone();
    let mut hit = false;
    for f in out
        .conflicts
        .iter_mut()
        .filter(|f| &f.student_id == student && &f.proposal_id == proposal)
    {
        f.status = status;
        hit = true;
    }
    if !hit {
        return Err(Error::Unknown {
            kind: "conflict flag",
            id: format!("{student}/{proposal}"),
        });
    }
    Ok(out)
}
