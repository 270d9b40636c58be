//! Student registration, proposal submission and the conformity review lifecycle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    normalize_org_name, ExperienceEntry, InterestArea, OrgId, Organization, Program, ProposalId,
    SemesterConfig, Student, StudentId,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalForm {
    pub title: String,
    pub description: String,
    pub deliverables: String,
    #[serde(default)]
    pub resources: Option<String>,
    #[serde(default)]
    pub observations: Option<String>,
    pub areas: BTreeSet<InterestArea>,
    pub org_id: OrgId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalStatus {
    Submitted,
    UnderReview,
    RevisionRequested,
    Approved,
    Rejected,
    Withdrawn,
}

impl fmt::Display for ProposalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProposalStatus::Submitted => "submitted",
            ProposalStatus::UnderReview => "under_review",
            ProposalStatus::RevisionRequested => "revision_requested",
            ProposalStatus::Approved => "approved",
            ProposalStatus::Rejected => "rejected",
            ProposalStatus::Withdrawn => "withdrawn",
        };
        f.write_str(s)
    }
}

impl ProposalStatus {
    /// Edges of the proposal lifecycle graph.
    pub fn can_transition(self, to: ProposalStatus) -> bool {
        use ProposalStatus::*;
        match (self, to) {
            (Withdrawn, _) => false,
            (_, Withdrawn) => true,
            (Submitted, UnderReview) => true,
            (UnderReview, Approved | RevisionRequested | Rejected) => true,
            (RevisionRequested, UnderReview) => true,
            _ => false,
        }
    }
}

pub const CONFORMITY_CRITERIA: [&str; 10] = [
    "requires knowledge and skills from previous years of the program",
    "requires a systematic technical design process",
    "real-world experience formally requested by an external organization",
    "allows incorporating relevant technical standards",
    "incorporates multiple realistic constraints",
    "requires experimentation and hands-on skills",
    "allows teamwork among students from one or more programs",
    "complexity appropriate for one academic semester",
    "enough work for about 360 hours per team member",
    "concrete and measurable goals",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformityChecklist {
    pub items: Vec<bool>,
    #[serde(default)]
    pub notes: String,
}

impl ConformityChecklist {
    pub fn all_pass() -> Self {
        ConformityChecklist {
            items: vec![true; CONFORMITY_CRITERIA.len()],
            notes: String::new(),
        }
    }

    pub fn passes(&self) -> bool {
        self.items.len() == CONFORMITY_CRITERIA.len() && self.items.iter().all(|&b| b)
    }

    pub fn failed_criteria(&self) -> Vec<&'static str> {
        self.items
            .iter()
            .zip(CONFORMITY_CRITERIA)
            .filter(|(ok, _)| !**ok)
            .map(|(_, c)| c)
            .collect()
    }
}

/// Per-vacancy sets of programs a seat should ideally be filled from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatProfile {
    pub seats: Vec<BTreeSet<Program>>,
}

impl SeatProfile {
    pub fn new<I, S>(seats: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'static str>,
    {
        SeatProfile {
            seats: seats
                .into_iter()
                .map(|s| s.into_iter().map(Program::new).collect())
                .collect(),
        }
    }

    pub fn validate(&self, config: &SemesterConfig) -> Result<()> {
        if self.seats.is_empty() {
            return Err(Error::Invalid(
                "seat profile needs at least one seat".into(),
            ));
        }
        if self.seats.len() > config.team_size_max {
            return Err(Error::Invalid(format!(
                "seat profile has {} seats, team_size_max is {}",
                self.seats.len(),
                config.team_size_max
            )));
        }
        for (i, seat) in self.seats.iter().enumerate() {
            if seat.is_empty() {
                return Err(Error::Invalid(format!("seat {} allows no program", i + 1)));
            }
            if let Some(p) = seat.iter().find(|p| !config.has_program(p)) {
                return Err(Error::Invalid(format!(
                    "seat {} names unknown program {p}",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub id: ProposalId,
    pub form: ProposalForm,
    pub status: ProposalStatus,
    #[serde(default)]
    pub checklist: Option<ConformityChecklist>,
    #[serde(default)]
    pub seat_profile: Option<SeatProfile>,
    #[serde(default)]
    pub review_notes: Option<String>,
}

impl Proposal {
    /// Catalog visibility.
    pub fn is_approved(&self) -> bool {
        self.status == ProposalStatus::Approved
    }

    fn transition(&mut self, to: ProposalStatus, operation: &'static str) -> Result<()> {
        if !self.status.can_transition(to) {
            return Err(self.state_error(operation));
        }
        self.status = to;
        Ok(())
    }

    fn state_error(&self, operation: &'static str) -> Error {
        Error::ProposalState {
            id: self.id.to_string(),
            status: self.status.to_string(),
            operation,
        }
    }
}

pub(crate) fn check_student(s: &Student, config: &SemesterConfig) -> Result<()> {
    if s.id.as_str().trim().is_empty() {
        return Err(Error::MissingField("id"));
    }
    if !(s.gpa >= 0.0 && s.gpa <= config.gpa_scale_max) {
        return Err(Error::GpaOutOfRange {
            gpa: s.gpa,
            max: config.gpa_scale_max,
        });
    }
    if !config.has_program(&s.program) {
        return Err(Error::Invalid(format!("unknown program {}", s.program)));
    }
    if let Some(e) = s
        .work_history
        .iter()
        .find(|e| e.organization.trim().is_empty())
    {
        return Err(Error::Invalid(format!(
            "experience entry with empty organization ({:?}, {:?})",
            e.kind, e.status
        )));
    }
    Ok(())
}

pub fn register_student(
    students: &mut BTreeMap<StudentId, Student>,
    record: Student,
    config: &SemesterConfig,
) -> Result<StudentId> {
    check_student(&record, config)?;
    if students.contains_key(&record.id) {
        return Err(Error::Duplicate {
            kind: "student",
            id: record.id.to_string(),
        });
    }
    let id = record.id.clone();
    students.insert(id.clone(), record);
    Ok(id)
}

/// Partial update; `None` leaves the field untouched.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudentPatch {
    pub name: Option<String>,
    pub program: Option<Program>,
    pub gpa: Option<f64>,
    pub interests: Option<BTreeSet<InterestArea>>,
    pub other_interest: Option<Option<String>>,
    pub work_history: Option<Vec<ExperienceEntry>>,
    pub family_ties: Option<Vec<String>>,
    pub extracurriculars: Option<Vec<String>>,
    pub social_activities: Option<Vec<String>>,
    pub linkedin: Option<Option<String>>,
}

pub fn update_student(
    students: &mut BTreeMap<StudentId, Student>,
    id: &StudentId,
    patch: StudentPatch,
    config: &SemesterConfig,
) -> Result<Student> {
    let current = students.get(id).ok_or_else(|| Error::Unknown {
        kind: "student",
        id: id.to_string(),
    })?;
    let mut next = current.clone();
    if let Some(v) = patch.name {
        next.name = v;
    }
    if let Some(v) = patch.program {
        next.program = v;
    }
    if let Some(v) = patch.gpa {
        next.gpa = v;
    }
    if let Some(v) = patch.interests {
        next.interests = v;
    }
    if let Some(v) = patch.other_interest {
        next.other_interest = v;
    }
    if let Some(v) = patch.work_history {
        next.work_history = v;
    }
    if let Some(v) = patch.family_ties {
        next.family_ties = v;
    }
    if let Some(v) = patch.extracurriculars {
        next.extracurriculars = v;
    }
    if let Some(v) = patch.social_activities {
        next.social_activities = v;
    }
    if let Some(v) = patch.linkedin {
        next.linkedin = v;
    }
    check_student(&next, config)?;
    students.insert(id.clone(), next.clone());
    Ok(next)
}

pub fn register_organization(
    orgs: &mut BTreeMap<OrgId, Organization>,
    org: Organization,
) -> Result<OrgId> {
    if org.name.trim().is_empty() {
        return Err(Error::MissingField("name"));
    }
    if orgs.contains_key(&org.id) {
        return Err(Error::Duplicate {
            kind: "organization",
            id: org.id.to_string(),
        });
    }
    let norm = normalize_org_name(&org.name);
    if orgs.values().any(|o| normalize_org_name(&o.name) == norm) {
        return Err(Error::Duplicate {
            kind: "organization name",
            id: org.name,
        });
    }
    let id = org.id.clone();
    orgs.insert(id.clone(), org);
    Ok(id)
}

fn check_form(form: &ProposalForm, orgs: &BTreeMap<OrgId, Organization>) -> Result<()> {
    if !orgs.contains_key(&form.org_id) {
        return Err(Error::Unknown {
            kind: "organization",
            id: form.org_id.to_string(),
        });
    }
    for (name, value) in [
        ("title", &form.title),
        ("description", &form.description),
        ("deliverables", &form.deliverables),
    ] {
        if value.trim().is_empty() {
            return Err(Error::MissingField(name));
        }
    }
    if form.areas.is_empty() {
        return Err(Error::MissingField("areas"));
    }
    Ok(())
}

fn next_proposal_id(proposals: &BTreeMap<ProposalId, Proposal>) -> ProposalId {
    (proposals.len() + 1..)
        .map(|n| ProposalId(format!("P{n:03}")))
        .find(|id| !proposals.contains_key(id))
        .expect("unbounded range")
}

/// Stores a new proposal with status `submitted`. When `id` is `None` the
/// next free `Pnnn` identifier is used.
pub fn submit_proposal(
    proposals: &mut BTreeMap<ProposalId, Proposal>,
    orgs: &BTreeMap<OrgId, Organization>,
    form: ProposalForm,
    id: Option<ProposalId>,
) -> Result<ProposalId> {
    check_form(&form, orgs)?;
    let id = match id {
        Some(id) if proposals.contains_key(&id) => {
            return Err(Error::Duplicate {
                kind: "proposal",
                id: id.to_string(),
            })
        }
        Some(id) => id,
        None => next_proposal_id(proposals),
    };
    proposals.insert(
        id.clone(),
        Proposal {
            id: id.clone(),
            form,
            status: ProposalStatus::Submitted,
            checklist: None,
            seat_profile: None,
            review_notes: None,
        },
    );
    Ok(id)
}

fn proposal_mut<'a>(
    proposals: &'a mut BTreeMap<ProposalId, Proposal>,
    id: &ProposalId,
) -> Result<&'a mut Proposal> {
    proposals.get_mut(id).ok_or_else(|| Error::Unknown {
        kind: "proposal",
        id: id.to_string(),
    })
}

/// Committee review. Every criterion must hold for the proposal to pass; a
/// passing proposal becomes approved once it also carries a seat profile.
pub fn review_conformity(
    proposals: &mut BTreeMap<ProposalId, Proposal>,
    id: &ProposalId,
    checklist: ConformityChecklist,
    decision_notes: &str,
) -> Result<Proposal> {
    let p = proposal_mut(proposals, id)?;
    if !matches!(
        p.status,
        ProposalStatus::Submitted | ProposalStatus::UnderReview | ProposalStatus::RevisionRequested
    ) {
        return Err(p.state_error("review"));
    }
    if checklist.items.len() != CONFORMITY_CRITERIA.len() {
        return Err(Error::Invalid(format!(
            "checklist has {} items, expected {}",
            checklist.items.len(),
            CONFORMITY_CRITERIA.len()
        )));
    }
    let mut next = p.clone();
    if next.status != ProposalStatus::UnderReview {
        next.transition(ProposalStatus::UnderReview, "review")?;
    }
    let passes = checklist.passes();
    next.checklist = Some(checklist);
    next.review_notes = Some(decision_notes.to_owned());
    if !passes {
        next.transition(ProposalStatus::RevisionRequested, "review")?;
    } else if next.seat_profile.is_some() {
        next.transition(ProposalStatus::Approved, "review")?;
    }
    *p = next.clone();
    Ok(next)
}

pub fn set_seat_profile(
    proposals: &mut BTreeMap<ProposalId, Proposal>,
    id: &ProposalId,
    profile: SeatProfile,
    config: &SemesterConfig,
) -> Result<Proposal> {
    let p = proposal_mut(proposals, id)?;
    if matches!(
        p.status,
        ProposalStatus::Rejected | ProposalStatus::Withdrawn
    ) {
        return Err(p.state_error("set seat profile"));
    }
    profile.validate(config)?;
    p.seat_profile = Some(profile);
    let checklist_ok = p.checklist.as_ref().is_some_and(|c| c.passes());
    if p.status == ProposalStatus::UnderReview && checklist_ok {
        p.transition(ProposalStatus::Approved, "set seat profile")?;
    }
    Ok(p.clone())
}

pub fn reject_proposal(
    proposals: &mut BTreeMap<ProposalId, Proposal>,
    id: &ProposalId,
    notes: &str,
) -> Result<Proposal> {
    let p = proposal_mut(proposals, id)?;
    let mut next = p.clone();
    if matches!(
        next.status,
        ProposalStatus::Submitted | ProposalStatus::RevisionRequested
    ) {
        next.transition(ProposalStatus::UnderReview, "reject")?;
    }
    next.transition(ProposalStatus::Rejected, "reject")?;
    next.review_notes = Some(notes.to_owned());
    *p = next.clone();
    Ok(next)
}

pub fn withdraw_proposal(
    proposals: &mut BTreeMap<ProposalId, Proposal>,
    id: &ProposalId,
) -> Result<Proposal> {
    let p = proposal_mut(proposals, id)?;
    p.transition(ProposalStatus::Withdrawn, "withdraw")?;
    Ok(p.clone())
}

/// Approved proposals in id order.
pub fn catalog(proposals: &BTreeMap<ProposalId, Proposal>) -> Vec<&Proposal> {
    proposals.values().filter(|p| p.is_approved()).collect()
}
