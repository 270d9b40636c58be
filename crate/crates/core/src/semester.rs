//! A semester as one versioned snapshot.
//!
//! Every mutation checks the phase gate, runs against a copy of the
//! snapshot and only replaces the current state when it succeeds, so a
//! failed operation leaves nothing half-applied. Successful mutations bump
//! the version by exactly one.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::advisors::{self, Advisor, AdvisorMap};
use crate::allocator::{self, Allocation, ConflictStatus, Instance, MovePreview};
use crate::balance::{self, BalanceReport, SourcingGap};
use crate::ballots::{self, Ballot, DemandStat};
use crate::error::{Error, Result};
use crate::intake::{self, ConformityChecklist, Proposal, ProposalForm, SeatProfile, StudentPatch};
use crate::model::{
    AdvisorId, OrgId, Organization, ProposalId, SemesterConfig, Student, StudentId,
};
use crate::store::SemesterSnapshot;
use crate::surveys::{self, NpsSummary, RecommendationBreakdown, SurveyPhase, SurveySubmission};
use crate::workflow::{self, Action, Phase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySummary {
    pub partner_final: NpsSummary,
    pub partner_pulse: NpsSummary,
    pub student_final: RecommendationBreakdown,
    pub student_pulse: RecommendationBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Semester {
    snapshot: SemesterSnapshot,
}

impl Semester {
    pub fn new(config: SemesterConfig) -> Result<Self> {
        Self::from_snapshot(SemesterSnapshot::new(config))
    }

    pub fn from_snapshot(snapshot: SemesterSnapshot) -> Result<Self> {
        snapshot.validate()?;
        Ok(Semester { snapshot })
    }

    pub fn snapshot(&self) -> &SemesterSnapshot {
        &self.snapshot
    }

    pub fn into_snapshot(self) -> SemesterSnapshot {
        self.snapshot
    }

    pub fn version(&self) -> u64 {
        self.snapshot.version
    }

    pub fn phase(&self) -> Phase {
        self.snapshot.phase
    }

    pub fn config(&self) -> &SemesterConfig {
        &self.snapshot.config
    }

    fn mutate<T>(
        &mut self,
        action: Action,
        f: impl FnOnce(&mut SemesterSnapshot) -> Result<T>,
    ) -> Result<T> {
        workflow::require(action, self.snapshot.phase)?;
        let mut next = self.snapshot.clone();
        let out = f(&mut next)?;
        next.version += 1;
        self.snapshot = next;
        Ok(out)
    }

    /// The allocation input: every student, approved proposals, ballots.
    pub fn instance(&self) -> Instance {
        let s = &self.snapshot;
        Instance {
            students: s.students.values().cloned().collect(),
            proposals: intake::catalog(&s.proposals).into_iter().cloned().collect(),
            organizations: s.organizations.values().cloned().collect(),
            ballots: s.ballots.values().cloned().collect(),
        }
    }

    fn cohort(&self) -> Vec<Student> {
        self.snapshot.students.values().cloned().collect()
    }

    // Reads

    pub fn required_projects(&self) -> BalanceReport {
        balance::required_projects(&self.cohort(), &self.snapshot.config)
    }

    pub fn balance(&self) -> BalanceReport {
        let catalog = intake::catalog(&self.snapshot.proposals);
        balance::coverage(&catalog, &self.cohort(), &self.snapshot.config)
    }

    pub fn sourcing_gaps(&self) -> Vec<SourcingGap> {
        balance::sourcing_gaps(&self.cohort(), &intake::catalog(&self.snapshot.proposals))
    }

    pub fn demand(&self) -> Vec<DemandStat> {
        ballots::demand_stats(self.snapshot.ballots.values(), &self.snapshot.proposals)
    }

    pub fn survey_summary(&self) -> SurveySummary {
        let s = &self.snapshot.surveys;
        SurveySummary {
            partner_final: surveys::nps_summary(s.partner_responses(SurveyPhase::Final)),
            partner_pulse: surveys::nps_summary(s.partner_responses(SurveyPhase::Pulse)),
            student_final: surveys::recommendation_breakdown(
                s.student_responses(SurveyPhase::Final),
            ),
            student_pulse: surveys::recommendation_breakdown(
                s.student_responses(SurveyPhase::Pulse),
            ),
        }
    }

    pub fn allocation(&self) -> Result<&Allocation> {
        self.snapshot.allocation.as_ref().ok_or(Error::NoAllocation)
    }

    /// Preview only; gated like a move but never changes the version.
    pub fn what_if(&self, student: &StudentId, target: Option<&ProposalId>) -> Result<MovePreview> {
        workflow::require(Action::WhatIfMove, self.snapshot.phase)?;
        let alloc = self.allocation()?;
        allocator::what_if_move(
            alloc,
            student,
            target,
            &self.instance(),
            &self.snapshot.config,
        )
    }

    // Intake

    pub fn register_student(&mut self, record: Student) -> Result<Student> {
        self.mutate(Action::RegisterStudent, |s| {
            let id = intake::register_student(&mut s.students, record, &s.config)?;
            Ok(s.students[&id].clone())
        })
    }

    pub fn update_student(&mut self, id: &StudentId, patch: StudentPatch) -> Result<Student> {
        self.mutate(Action::UpdateStudent, |s| {
            intake::update_student(&mut s.students, id, patch, &s.config)
        })
    }

    pub fn register_organization(&mut self, org: Organization) -> Result<Organization> {
        self.mutate(Action::RegisterOrganization, |s| {
            let id = intake::register_organization(&mut s.organizations, org)?;
            Ok(s.organizations[&id].clone())
        })
    }

    pub fn submit_proposal(
        &mut self,
        form: ProposalForm,
        id: Option<ProposalId>,
    ) -> Result<Proposal> {
        self.mutate(Action::SubmitProposal, |s| {
            let id = intake::submit_proposal(&mut s.proposals, &s.organizations, form, id)?;
            Ok(s.proposals[&id].clone())
        })
    }

    pub fn review_conformity(
        &mut self,
        id: &ProposalId,
        checklist: ConformityChecklist,
        notes: &str,
    ) -> Result<Proposal> {
        self.mutate(Action::ReviewConformity, |s| {
            intake::review_conformity(&mut s.proposals, id, checklist, notes)
        })
    }

    pub fn set_seat_profile(&mut self, id: &ProposalId, profile: SeatProfile) -> Result<Proposal> {
        self.mutate(Action::SetSeatProfile, |s| {
            intake::set_seat_profile(&mut s.proposals, id, profile, &s.config)
        })
    }

    pub fn reject_proposal(&mut self, id: &ProposalId, notes: &str) -> Result<Proposal> {
        self.mutate(Action::RejectProposal, |s| {
            intake::reject_proposal(&mut s.proposals, id, notes)
        })
    }

    pub fn withdraw_proposal(&mut self, id: &ProposalId) -> Result<Proposal> {
        self.mutate(Action::WithdrawProposal, |s| {
            let p = intake::withdraw_proposal(&mut s.proposals, id)?;
            // a withdrawn project can no longer be ranked
            for b in s.ballots.values_mut() {
                b.choices.retain(|c| c != id);
            }
            Ok(p)
        })
    }

    pub fn register_advisor(&mut self, advisor: Advisor) -> Result<Advisor> {
        self.mutate(Action::RegisterAdvisor, |s| {
            advisors::validate_advisor(&advisor)?;
            if s.advisors.contains_key(&advisor.id) {
                return Err(Error::Duplicate {
                    kind: "advisor",
                    id: advisor.id.to_string(),
                });
            }
            s.advisors.insert(advisor.id.clone(), advisor.clone());
            Ok(advisor)
        })
    }

    // Ballots

    pub fn submit_ballot(
        &mut self,
        student: &StudentId,
        choices: Vec<ProposalId>,
        now: DateTime<Utc>,
    ) -> Result<Ballot> {
        self.mutate(Action::SubmitBallot, |s| {
            ballots::submit_ballot(
                &mut s.ballots,
                &s.students,
                &s.proposals,
                student,
                choices,
                now,
                &s.config,
            )
        })
    }

    // Allocation

    /// Runs the heuristic from scratch, replacing any draft allocation.
    pub fn allocate(&mut self, seed: Option<u64>) -> Result<Allocation> {
        let instance = self.instance();
        self.mutate(Action::Allocate, |s| {
            if s.allocation.as_ref().is_some_and(|a| a.finalized) {
                return Err(Error::Finalized);
            }
            if let Some(seed) = seed {
                s.config.rng_seed = seed;
            }
            let a = allocator::allocate(&instance, &s.config)?;
            s.allocation = Some(a.clone());
            Ok(a)
        })
    }

    pub fn apply_move(
        &mut self,
        student: &StudentId,
        target: Option<&ProposalId>,
    ) -> Result<Allocation> {
        let instance = self.instance();
        self.mutate(Action::ApplyMove, |s| {
            let cur = s.allocation.as_ref().ok_or(Error::NoAllocation)?;
            let a = allocator::apply_move(cur, student, target, &instance, &s.config)?;
            s.allocation = Some(a.clone());
            Ok(a)
        })
    }

    pub fn set_conflict_status(
        &mut self,
        student: &StudentId,
        proposal: &ProposalId,
        status: ConflictStatus,
    ) -> Result<Allocation> {
        self.mutate(Action::SetConflictStatus, |s| {
            let cur = s.allocation.as_ref().ok_or(Error::NoAllocation)?;
            let a = allocator::set_conflict_status(cur, student, proposal, status)?;
            s.allocation = Some(a.clone());
            Ok(a)
        })
    }

    pub fn finalize(&mut self) -> Result<Allocation> {
        self.mutate(Action::Finalize, |s| {
            let cur = s.allocation.as_ref().ok_or(Error::NoAllocation)?;
            let a = allocator::finalize(cur, &s.config)?;
            s.allocation = Some(a.clone());
            Ok(a)
        })
    }

    // Advisors

    pub fn assign_advisors(&mut self) -> Result<AdvisorMap> {
        self.mutate(Action::AssignAdvisors, |s| {
            let alloc = s.allocation.as_ref().ok_or(Error::NoAllocation)?;
            let pool: Vec<Advisor> = s.advisors.values().cloned().collect();
            let map = advisors::assign_advisors(alloc, &s.proposals, &pool)?;
            s.advisor_map = Some(map.clone());
            Ok(map)
        })
    }

    pub fn reassign_advisor(
        &mut self,
        group: &ProposalId,
        advisor: &AdvisorId,
    ) -> Result<AdvisorMap> {
        self.mutate(Action::ReassignAdvisor, |s| {
            let cur = s
                .advisor_map
                .as_ref()
                .ok_or(Error::Invalid("advisors are not assigned yet".into()))?;
            let pool: Vec<Advisor> = s.advisors.values().cloned().collect();
            let map = advisors::reassign_advisor(cur, &pool, group, advisor)?;
            s.advisor_map = Some(map.clone());
            Ok(map)
        })
    }

    // Surveys

    pub fn record_survey(&mut self, submission: SurveySubmission) -> Result<String> {
        self.mutate(Action::RecordSurvey, |s| {
            let orgs: BTreeSet<&OrgId> = s.organizations.keys().collect();
            surveys::record_survey(&mut s.surveys, submission, &s.students, &s.proposals, &orgs)
        })
    }

    // Workflow

    pub fn advance(&mut self, to: Phase) -> Result<Phase> {
        self.mutate(Action::AdvancePhase, |s| {
            workflow::check_advance(s.phase, to)?;
            s.phase = to;
            Ok(to)
        })
    }
}
