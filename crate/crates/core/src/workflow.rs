//! Semester timeline and the phase gate every mutation passes through.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    InterestCollection,
    Sourcing,
    ConformityReview,
    CatalogPublished,
    BallotWindow,
    Allocation,
    AdvisorAssignment,
    Execution,
    MidtermReview,
    FinalReview,
    ExecutivePresentation,
    SurveysOpen,
    Closed,
}

impl Phase {
    pub const ALL: [Phase; 13] = [
        Phase::InterestCollection,
        Phase::Sourcing,
        Phase::ConformityReview,
        Phase::CatalogPublished,
        Phase::BallotWindow,
        Phase::Allocation,
        Phase::AdvisorAssignment,
        Phase::Execution,
        Phase::MidtermReview,
        Phase::FinalReview,
        Phase::ExecutivePresentation,
        Phase::SurveysOpen,
        Phase::Closed,
    ];

    pub fn successor(self) -> Option<Phase> {
        let i = Self::ALL.iter().position(|&p| p == self)?;
        Self::ALL.get(i + 1).copied()
    }
}

/// Checks a transition: only the immediate successor, or an abort to `closed`.
pub fn check_advance(from: Phase, to: Phase) -> Result<()> {
    let ok = from != Phase::Closed && (Some(to) == from.successor() || to == Phase::Closed);
    if ok {
        Ok(())
    } else {
        Err(Error::PhaseTransition { from, to })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Read,
    RegisterStudent,
    UpdateStudent,
    RegisterOrganization,
    SubmitProposal,
    ReviewConformity,
    SetSeatProfile,
    RejectProposal,
    WithdrawProposal,
    RegisterAdvisor,
    SubmitBallot,
    Allocate,
    WhatIfMove,
    ApplyMove,
    SetConflictStatus,
    Finalize,
    AssignAdvisors,
    ReassignAdvisor,
    RecordSurvey,
    AdvancePhase,
}

impl Action {
    pub const ALL: [Action; 20] = [
        Action::Read,
        Action::RegisterStudent,
        Action::UpdateStudent,
        Action::RegisterOrganization,
        Action::SubmitProposal,
        Action::ReviewConformity,
        Action::SetSeatProfile,
        Action::RejectProposal,
        Action::WithdrawProposal,
        Action::RegisterAdvisor,
        Action::SubmitBallot,
        Action::Allocate,
        Action::WhatIfMove,
        Action::ApplyMove,
        Action::SetConflictStatus,
        Action::Finalize,
        Action::AssignAdvisors,
        Action::ReassignAdvisor,
        Action::RecordSurvey,
        Action::AdvancePhase,
    ];
}

/// The static gate table.
pub fn gate(action: Action, phase: Phase) -> bool {
    use Action::*;
    use Phase::*;
    match action {
        Read => true,
        AdvancePhase => phase != Closed,
        RegisterStudent => matches!(phase, InterestCollection | Sourcing),
        UpdateStudent => matches!(
            phase,
            InterestCollection | Sourcing | ConformityReview | CatalogPublished
        ),
        RegisterOrganization => matches!(phase, InterestCollection | Sourcing),
        SubmitProposal => phase == Sourcing,
        ReviewConformity | SetSeatProfile | RejectProposal => {
            matches!(phase, Sourcing | ConformityReview)
        }
        WithdrawProposal => matches!(phase, Sourcing | ConformityReview | CatalogPublished),
        RegisterAdvisor => !matches!(
            phase,
            Execution | MidtermReview | FinalReview | ExecutivePresentation | SurveysOpen | Closed
        ),
        SubmitBallot => phase == BallotWindow,
        Allocate | WhatIfMove | ApplyMove | SetConflictStatus | Finalize => phase == Allocation,
        AssignAdvisors | ReassignAdvisor => phase == AdvisorAssignment,
        RecordSurvey => matches!(phase, Execution | SurveysOpen),
    }
}

pub fn require(action: Action, phase: Phase) -> Result<()> {
    if gate(action, phase) {
        Ok(())
    } else {
        Err(Error::Gate { action, phase })
    }
}

/// Advisory start day of each phase, counted from semester day 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseSchedule(pub BTreeMap<Phase, i64>);

impl Default for PhaseSchedule {
    /// Day 0 interest meeting, a 14-day ballot window and roughly 135 days
    /// of project execution.
    fn default() -> Self {
        use Phase::*;
        PhaseSchedule(
            [
                (InterestCollection, 0),
                (Sourcing, 14),
                (ConformityReview, 60),
                (CatalogPublished, 90),
                (BallotWindow, 97),
                (Allocation, 111),
                (AdvisorAssignment, 118),
                (Execution, 125),
                (MidtermReview, 192),
                (FinalReview, 246),
                (ExecutivePresentation, 255),
                (SurveysOpen, 260),
                (Closed, 275),
            ]
            .into(),
        )
    }
}

impl PhaseSchedule {
    pub fn validate(&self) -> Result<()> {
        let mut last: Option<(Phase, i64)> = None;
        for phase in Phase::ALL {
            let Some(&day) = self.0.get(&phase) else {
                return Err(Error::Invalid(format!(
                    "schedule has no start day for {phase:?}"
                )));
            };
            if let Some((prev, d)) = last {
                if day < d {
                    return Err(Error::Invalid(format!(
                        "{phase:?} starts on day {day}, before {prev:?} on day {d}"
                    )));
                }
            }
            last = Some((phase, day));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: PhaseSchedule = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}
