//! Ranked project ballots, demand statistics and interest alignment.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intake::Proposal;
use crate::model::{InterestArea, ProposalId, SemesterConfig, Student, StudentId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ballot {
    pub student_id: StudentId,
    /// Rank 1 first.
    pub choices: Vec<ProposalId>,
    pub submitted_at: DateTime<Utc>,
}

impl Ballot {
    /// 1-based rank of `proposal`, if listed.
    pub fn rank_of(&self, proposal: &ProposalId) -> Option<usize> {
        self.choices
            .iter()
            .position(|p| p == proposal)
            .map(|i| i + 1)
    }
}

pub fn validate_choices(
    choices: &[ProposalId],
    proposals: &BTreeMap<ProposalId, Proposal>,
    config: &SemesterConfig,
) -> Result<()> {
    if choices.len() < config.min_ballot_choices {
        return Err(Error::BallotTooShort {
            got: choices.len(),
            min: config.min_ballot_choices,
        });
    }
    let mut seen = HashSet::new();
    for c in choices {
        if !seen.insert(c) {
            return Err(Error::BallotDuplicate(c.to_string()));
        }
        if !proposals.get(c).is_some_and(|p| p.is_approved()) {
            return Err(Error::BallotUnapproved(c.to_string()));
        }
    }
    Ok(())
}

/// Validates and stores a ballot, replacing any earlier one from the same student.
pub fn submit_ballot(
    ballots: &mut BTreeMap<StudentId, Ballot>,
    students: &BTreeMap<StudentId, Student>,
    proposals: &BTreeMap<ProposalId, Proposal>,
    student_id: &StudentId,
    choices: Vec<ProposalId>,
    now: DateTime<Utc>,
    config: &SemesterConfig,
) -> Result<Ballot> {
    if !students.contains_key(student_id) {
        return Err(Error::Unknown {
            kind: "student",
            id: student_id.to_string(),
        });
    }
    validate_choices(&choices, proposals, config)?;
    let ballot = Ballot {
        student_id: student_id.clone(),
        choices,
        submitted_at: now,
    };
    ballots.insert(student_id.clone(), ballot.clone());
    Ok(ballot)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandStat {
    pub proposal_id: ProposalId,
    pub first_choice_count: usize,
    pub top3_count: usize,
    pub total_mentions: usize,
}

/// One row per approved proposal, in proposal id order.
pub fn demand_stats<'a>(
    ballots: impl IntoIterator<Item = &'a Ballot>,
    proposals: &BTreeMap<ProposalId, Proposal>,
) -> Vec<DemandStat> {
    let mut stats: BTreeMap<&ProposalId, DemandStat> = proposals
        .values()
        .filter(|p| p.is_approved())
        .map(|p| {
            (
                &p.id,
                DemandStat {
                    proposal_id: p.id.clone(),
                    first_choice_count: 0,
                    top3_count: 0,
                    total_mentions: 0,
                },
            )
        })
        .collect();
    for ballot in ballots {
        for (i, choice) in ballot.choices.iter().enumerate() {
            if let Some(s) = stats.get_mut(choice) {
                s.total_mentions += 1;
                if i < 3 {
                    s.top3_count += 1;
                }
                if i == 0 {
                    s.first_choice_count += 1;
                }
            }
        }
    }
    stats.into_values().collect()
}

/// Jaccard index of two sets; zero when both are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn alignment_score(interests: &BTreeSet<InterestArea>, areas: &BTreeSet<InterestArea>) -> f64 {
    jaccard(interests, areas)
}
