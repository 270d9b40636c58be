//! Deterministic builders for the committed fixture files.

use std::path::PathBuf;

use capstone_core::advisors::Advisor;
use capstone_core::allocator::ConflictStatus;
use capstone_core::intake::{ConformityChecklist, ProposalForm, SeatProfile};
use capstone_core::model::{
    ExperienceEntry, ExperienceKind, ExperienceStatus, InterestArea, OrgCategory, Organization,
    ProposalId, SemesterConfig, Student,
};
use capstone_core::store::SemesterSnapshot;
use capstone_core::synth::{self, SynthParams};
use capstone_core::workflow::Phase;
use capstone_core::Semester;
use chrono::{TimeZone, Utc};

use InterestArea::*;

pub fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn form(title: &str, org: &str, areas: &[InterestArea]) -> ProposalForm {
    ProposalForm {
        title: title.into(),
        description: format!("{title} for an external partner"),
        deliverables: "working prototype and final report".into(),
        resources: None,
        observations: None,
        areas: areas.iter().copied().collect(),
        org_id: org.into(),
    }
}

fn student(id: &str, program: &str, gpa: f64, interests: &[InterestArea]) -> Student {
    let mut s = Student::new(id, program, gpa);
    s.name = format!("Student {id}");
    s.interests = interests.iter().copied().collect();
    s
}

fn advance_to(sem: &mut Semester, target: Phase) {
    while sem.phase() != target {
        let next = sem.phase().successor().unwrap();
        sem.advance(next).unwrap();
    }
}

/// Drives a semester through intake, ballots, allocation, finalization and
/// advisor assignment. Twelve students, four proposals.
pub fn semester() -> SemesterSnapshot {
    let config = SemesterConfig {
        min_ballot_choices: 4,
        ..SemesterConfig::default()
    };
    let mut sem = Semester::new(config).unwrap();
    for (id, name, cat) in [
        ("O1", "Acme Robotics", OrgCategory::Company),
        ("O2", "Globex Corp", OrgCategory::Company),
        ("O3", "Initech Labs", OrgCategory::ResearchCenter),
        ("O4", "Green Futures", OrgCategory::Ngo),
    ] {
        sem.register_organization(Organization {
            id: id.into(),
            name: name.into(),
            category: cat,
        })
        .unwrap();
    }
    let roster = [
        ("S01", "EM", 8.7, vec![Robotics, IndustrialAutomation]),
        ("S02", "EC", 7.9, vec![Robotics]),
        ("S03", "EX", 9.1, vec![DynamicSystemsControl, Robotics]),
        ("S04", "CS", 6.8, vec![CloudComputing]),
        ("S05", "EM", 8.2, vec![AdvancedManufacturing]),
        (
            "S06",
            "CS",
            9.4,
            vec![CloudComputing, ComputationalSimulation],
        ),
        ("S07", "EC", 7.1, vec![AdministrationEconomicsFinance]),
        ("S08", "EX", 8.0, vec![ComputationalSimulation]),
        ("S09", "EM", 7.6, vec![EnergyEfficiency]),
        (
            "S10",
            "EC",
            8.9,
            vec![EnergyEfficiency, MobilityEngineering],
        ),
        (
            "S11",
            "EX",
            6.9,
            vec![AdvancedManufacturing, IndustrialAutomation],
        ),
        ("S12", "CS", 8.4, vec![EnergyEfficiency, CloudComputing]),
    ];
    for (id, program, gpa, interests) in &roster {
        let mut s = student(id, program, *gpa, interests);
        if *id == "S07" {
            s.work_history.push(ExperienceEntry {
                organization: "GLOBEX  corp".into(),
                kind: ExperienceKind::Internship,
                status: ExperienceStatus::Past,
            });
        }
        if *id == "S10" {
            s.family_ties.push("Initech Labs".into());
        }
        sem.register_student(s).unwrap();
    }
    sem.advance(Phase::Sourcing).unwrap();
    let specs = [
        (
            "Warehouse picking arm",
            "O1",
            vec![Robotics, IndustrialAutomation],
            SeatProfile::new([
                vec!["EM"],
                vec!["EM"],
                vec!["EX", "EM"],
                vec!["EC", "EX", "EM", "CS"],
            ]),
        ),
        (
            "Demand forecasting service",
            "O2",
            vec![CloudComputing, AdministrationEconomicsFinance],
            SeatProfile::new([
                vec!["CS"],
                vec!["CS", "EC"],
                vec!["EC", "EX", "EM", "CS"],
                vec!["EC", "EX", "EM", "CS"],
            ]),
        ),
        (
            "Thermal simulation toolkit",
            "O3",
            vec![ComputationalSimulation, EnergyEfficiency],
            SeatProfile::new([
                vec!["EX"],
                vec!["EM", "EX"],
                vec!["CS"],
                vec!["EC", "EX", "EM", "CS"],
            ]),
        ),
        (
            "Solar microgrid monitor",
            "O4",
            vec![EnergyEfficiency, MobilityEngineering],
            SeatProfile::new([
                vec!["EC"],
                vec!["EC", "EM"],
                vec!["EC", "EX", "EM", "CS"],
                vec!["CS"],
            ]),
        ),
    ];
    for (title, org, areas, profile) in specs {
        let id = sem
            .submit_proposal(form(title, org, &areas), None)
            .unwrap()
            .id;
        sem.review_conformity(
            &id,
            ConformityChecklist::all_pass(),
            "meets every criterion",
        )
        .unwrap();
        sem.set_seat_profile(&id, profile).unwrap();
    }
    for (id, name, prefs) in [
        ("A1", "Advisor One", vec![Robotics, IndustrialAutomation]),
        ("A2", "Advisor Two", vec![CloudComputing]),
        ("A3", "Advisor Three", vec![EnergyEfficiency]),
    ] {
        sem.register_advisor(Advisor {
            id: id.into(),
            name: name.into(),
            max_load: 2,
            area_prefs: prefs.into_iter().collect(),
        })
        .unwrap();
    }
    advance_to(&mut sem, Phase::BallotWindow);
    let p = |n: u8| ProposalId::from(format!("P00{n}").as_str());
    let ballots: [(&str, [u8; 4]); 12] = [
        ("S01", [1, 2, 3, 4]),
        ("S02", [1, 2, 4, 3]),
        ("S03", [1, 3, 2, 4]),
        ("S04", [1, 2, 3, 4]),
        ("S05", [1, 4, 2, 3]),
        ("S06", [2, 3, 1, 4]),
        ("S07", [2, 1, 3, 4]),
        ("S08", [2, 3, 4, 1]),
        ("S09", [3, 4, 2, 1]),
        ("S10", [3, 4, 1, 2]),
        ("S11", [4, 1, 3, 2]),
        ("S12", [4, 2, 3, 1]),
    ];
    for (i, (sid, order)) in ballots.iter().enumerate() {
        let at = Utc.with_ymd_and_hms(2025, 3, 3, 9, i as u32, 0).unwrap();
        sem.submit_ballot(&(*sid).into(), order.iter().map(|&n| p(n)).collect(), at)
            .unwrap();
    }
    advance_to(&mut sem, Phase::Allocation);
    sem.allocate(None).unwrap();
    let open: Vec<_> = {
        let a = sem.allocation().unwrap();
        a.conflicts
            .iter()
            .filter(|f| a.group_of(&f.student_id) == Some(&f.proposal_id))
            .map(|f| (f.student_id.clone(), f.proposal_id.clone()))
            .collect()
    };
    for (s, p) in open {
        sem.set_conflict_status(&s, &p, ConflictStatus::Waived)
            .unwrap();
    }
    sem.finalize().unwrap();
    advance_to(&mut sem, Phase::AdvisorAssignment);
    sem.assign_advisors().unwrap();
    sem.into_snapshot()
}

/// Six students, two proposals, ready to allocate.
pub fn small() -> SemesterSnapshot {
    let config = SemesterConfig {
        min_ballot_choices: 1,
        ..SemesterConfig::default()
    };
    let mut snap = synth::snapshot(SynthParams::new(6, 2), &config, 6);
    snap.config = config;
    snap
}

/// A hundred students and thirty approved proposals in the allocation phase.
pub fn cohort100() -> SemesterSnapshot {
    synth::snapshot(
        SynthParams {
            conflict_rate: 0.05,
            ..SynthParams::new(100, 30)
        },
        &SemesterConfig::default(),
        100,
    )
}

type Builder = fn() -> SemesterSnapshot;

pub const FILES: [(&str, Builder); 3] = [
    ("semester.json", semester),
    ("small.json", small),
    ("cohort100.json", cohort100),
];
