//! End-of-project questionnaires and satisfaction aggregates.
//!
//! Two partner scores are reported side by side: the arithmetic mean of the
//! 0-10 recommendation answers and the classic promoter-minus-detractor NPS.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intake::Proposal;
use crate::model::{OrgId, ProposalId, Student, StudentId};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurveyPhase {
    /// Collected while the project is running.
    Pulse,
    #[default]
    Final,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartnerSurvey {
    pub org_id: OrgId,
    pub proposal_id: ProposalId,
    pub progressed_as_expected: bool,
    #[serde(default)]
    pub progress_comments: String,
    #[serde(default)]
    pub communication_comments: String,
    #[serde(default)]
    pub team_organization_comments: String,
    #[serde(default)]
    pub other_observations: String,
    pub recommend_score: i64,
    #[serde(default)]
    pub phase: SurveyPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recommendation {
    StronglyRecommend,
    RecommendWithReservations,
    NotRecommend,
}

impl Recommendation {
    pub const ALL: [Recommendation; 3] = [
        Recommendation::StronglyRecommend,
        Recommendation::RecommendWithReservations,
        Recommendation::NotRecommend,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentSurvey {
    pub student_id: StudentId,
    pub proposal_id: ProposalId,
    pub recommend_company: Recommendation,
    pub top_choice_employer: bool,
    #[serde(default)]
    pub comments: String,
    #[serde(default)]
    pub phase: SurveyPhase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurveySubmission {
    Partner(PartnerSurvey),
    Student(StudentSurvey),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyStore {
    /// Keyed by proposal and phase; one partner response per project.
    pub partner: BTreeMap<String, PartnerSurvey>,
    /// Keyed by student and phase.
    pub student: BTreeMap<String, StudentSurvey>,
}

impl SurveyStore {
    pub fn partner_responses(&self, phase: SurveyPhase) -> Vec<&PartnerSurvey> {
        self.partner.values().filter(|s| s.phase == phase).collect()
    }

    pub fn student_responses(&self, phase: SurveyPhase) -> Vec<&StudentSurvey> {
        self.student.values().filter(|s| s.phase == phase).collect()
    }
}

fn phase_key(p: SurveyPhase) -> &'static str {
    match p {
        SurveyPhase::Pulse => "pulse",
        SurveyPhase::Final => "final",
    }
}

/// Stores a response; a second response from the same respondent in the same
/// phase replaces the first. Returns the storage key.
pub fn record_survey(
    store: &mut SurveyStore,
    submission: SurveySubmission,
    students: &BTreeMap<StudentId, Student>,
    proposals: &BTreeMap<ProposalId, Proposal>,
    orgs: &BTreeSet<&OrgId>,
) -> Result<String> {
    let unknown = |kind: &'static str, id: &dyn std::fmt::Display| Error::Unknown {
        kind,
        id: id.to_string(),
    };
    match submission {
        SurveySubmission::Partner(s) => {
            if !(0..=10).contains(&s.recommend_score) {
                return Err(Error::ScoreOutOfRange(s.recommend_score));
            }
            if !orgs.contains(&s.org_id) {
                return Err(unknown("organization", &s.org_id));
            }
            let p = proposals
                .get(&s.proposal_id)
                .ok_or_else(|| unknown("proposal", &s.proposal_id))?;
            if p.form.org_id != s.org_id {
                return Err(Error::Invalid(format!(
                    "proposal {} belongs to {}, not {}",
                    p.id, p.form.org_id, s.org_id
                )));
            }
            let key = format!("partner/{}/{}", s.proposal_id, phase_key(s.phase));
            store.partner.insert(key.clone(), s);
            Ok(key)
        }
        SurveySubmission::Student(s) => {
            if !students.contains_key(&s.student_id) {
                return Err(unknown("student", &s.student_id));
            }
            if !proposals.contains_key(&s.proposal_id) {
                return Err(unknown("proposal", &s.proposal_id));
            }
            let key = format!("student/{}/{}", s.student_id, phase_key(s.phase));
            store.student.insert(key.clone(), s);
            Ok(key)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpsSummary {
    pub responses: usize,
    /// Mean of the raw 0-10 scores.
    pub mean_score: Option<f64>,
    pub promoters: usize,
    pub passives: usize,
    pub detractors: usize,
    /// 100 * (promoters - detractors) / responses.
    pub classic_nps: Option<f64>,
}

pub fn nps_summary<'a>(surveys: impl IntoIterator<Item = &'a PartnerSurvey>) -> NpsSummary {
    let scores: Vec<i64> = surveys.into_iter().map(|s| s.recommend_score).collect();
    let n = scores.len();
    let promoters = scores.iter().filter(|&&s| s >= 9).count();
    let passives = scores.iter().filter(|&&s| (7..=8).contains(&s)).count();
    let detractors = scores.iter().filter(|&&s| s <= 6).count();
    let (mean_score, classic_nps) = if n == 0 {
        (None, None)
    } else {
        (
            Some(scores.iter().sum::<i64>() as f64 / n as f64),
            Some(100.0 * (promoters as f64 - detractors as f64) / n as f64),
        )
    };
    NpsSummary {
        responses: n,
        mean_score,
        promoters,
        passives,
        detractors,
        classic_nps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationBreakdown {
    pub total: usize,
    pub counts: BTreeMap<Recommendation, usize>,
    /// Rounded to one decimal; `None` when there are no responses.
    pub percentages: Option<BTreeMap<Recommendation, f64>>,
}

pub fn recommendation_breakdown<'a>(
    surveys: impl IntoIterator<Item = &'a StudentSurvey>,
) -> RecommendationBreakdown {
    let mut counts: BTreeMap<Recommendation, usize> =
        Recommendation::ALL.iter().map(|&r| (r, 0)).collect();
    let mut total = 0;
    for s in surveys {
        *counts.entry(s.recommend_company).or_default() += 1;
        total += 1;
    }
    let percentages = (total > 0).then(|| {
        counts
            .iter()
            .map(|(&r, &c)| (r, (c as f64 * 1000.0 / total as f64).round() / 10.0))
            .collect()
    });
    RecommendationBreakdown {
        total,
        counts,
        percentages,
    }
}
