//! Seeded synthetic cohorts for tests, benchmarks and demos.

use std::collections::BTreeSet;

use chrono::{TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocator::Instance;
use crate::ballots::Ballot;
use crate::intake::{ConformityChecklist, Proposal, ProposalForm, ProposalStatus, SeatProfile};
use crate::model::{
    ExperienceEntry, ExperienceKind, ExperienceStatus, InterestArea, OrgCategory, OrgId,
    Organization, Program, ProposalId, SemesterConfig, Student, StudentId,
};
use crate::store::SemesterSnapshot;
use crate::workflow::Phase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub students: usize,
    pub proposals: usize,
    /// Longest ballot; capped by the number of proposals.
    pub ballot_len: usize,
    /// Probability that a student lists a current job at a partner.
    pub conflict_rate: f64,
}

impl SynthParams {
    pub fn new(students: usize, proposals: usize) -> Self {
        SynthParams {
            students,
            proposals,
            ballot_len: 5,
            conflict_rate: 0.0,
        }
    }
}

fn pick_areas(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> BTreeSet<InterestArea> {
    let k = rng.gen_range(lo..=hi);
    InterestArea::ALL.choose_multiple(rng, k).copied().collect()
}

/// Builds a ready-to-allocate instance: every proposal approved with a
/// random seat profile, every student holding a ballot.
pub fn instance(params: SynthParams, config: &SemesterConfig, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let programs: Vec<Program> = config.programs.iter().map(|p| p.code.clone()).collect();
    let width = (params.proposals.max(1) - 1).to_string().len().max(2);

    let organizations: Vec<Organization> = (0..params.proposals)
        .map(|i| Organization {
            id: OrgId(format!("O{i:0width$}")),
            name: format!("Partner {i}"),
            category: OrgCategory::Company,
        })
        .collect();

    let proposals: Vec<Proposal> = (0..params.proposals)
        .map(|i| {
            let n_seats = rng.gen_range(config.team_size_min.max(1)..=config.team_size_max.max(1));
            let seats = (0..n_seats)
                .map(|_| {
                    let k = rng.gen_range(1..=programs.len().min(2));
                    programs.choose_multiple(&mut rng, k).cloned().collect()
                })
                .collect();
            Proposal {
                id: ProposalId(format!("P{i:0width$}")),
                form: ProposalForm {
                    title: format!("Project {i}"),
                    description: "synthetic".into(),
                    deliverables: "prototype".into(),
                    resources: None,
                    observations: None,
                    areas: pick_areas(&mut rng, 1, 3),
                    org_id: organizations[i].id.clone(),
                },
                status: ProposalStatus::Approved,
                checklist: Some(ConformityChecklist::all_pass()),
                seat_profile: Some(SeatProfile { seats }),
                review_notes: None,
            }
        })
        .collect();

    let sw = params.students.max(1).to_string().len().max(3);
    let students: Vec<Student> = (0..params.students)
        .map(|i| {
            let program = programs
                .choose(&mut rng)
                .expect("programs configured")
                .clone();
            let gpa = (rng.gen_range(5.0..config.gpa_scale_max) * 100.0).round() / 100.0;
            let mut s = Student::new(format!("S{i:0sw$}"), program.as_str(), gpa);
            s.name = format!("Student {i}");
            s.interests = pick_areas(&mut rng, 1, 4);
            if !organizations.is_empty() && rng.gen_bool(params.conflict_rate.clamp(0.0, 1.0)) {
                let o = organizations.choose(&mut rng).expect("nonempty");
                s.work_history.push(ExperienceEntry {
                    organization: o.name.clone(),
                    kind: ExperienceKind::Job,
                    status: ExperienceStatus::Current,
                });
            }
            s
        })
        .collect();

    let len = params.ballot_len.min(params.proposals);
    let stamp = Utc
        .with_ymd_and_hms(2025, 1, 1, 0, 0, 0)
        .single()
        .expect("valid date");
    let ids: Vec<ProposalId> = proposals.iter().map(|p| p.id.clone()).collect();
    let ballots = students
        .iter()
        .map(|s| Ballot {
            student_id: s.id.clone(),
            choices: ids.choose_multiple(&mut rng, len).cloned().collect(),
            submitted_at: stamp,
        })
        .collect();

    Instance {
        students,
        proposals,
        organizations,
        ballots,
    }
}

/// Wraps a synthetic instance into a snapshot in the allocation phase.
pub fn snapshot(params: SynthParams, config: &SemesterConfig, seed: u64) -> SemesterSnapshot {
    let inst = instance(params, config, seed);
    let mut snap = SemesterSnapshot::new(config.clone());
    snap.phase = Phase::Allocation;
    snap.students = inst
        .students
        .into_iter()
        .map(|s| (s.id.clone(), s))
        .collect();
    snap.organizations = inst
        .organizations
        .into_iter()
        .map(|o| (o.id.clone(), o))
        .collect();
    snap.proposals = inst
        .proposals
        .into_iter()
        .map(|p| (p.id.clone(), p))
        .collect();
    snap.ballots = inst
        .ballots
        .into_iter()
        .map(|b| (b.student_id.clone(), b))
        .collect::<std::collections::BTreeMap<StudentId, Ballot>>();
    snap
}
