//! Demand and supply analytics per academic program.
//!
//! A seat that allows several programs counts once toward every program it
//! allows, so the per-program supplied seat counts can add up to more than the
//! number of physical seats. Use [`crate::allocator::seat_feasibility`] for
//! an exact matching view.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::intake::Proposal;
use crate::model::{InterestArea, Program, SemesterConfig, Student};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramBalance {
    pub enrolled_students: usize,
    pub necessary_projects: usize,
    pub supplied_seats: usize,
    /// `None` when nobody is enrolled.
    pub coverage_ratio: Option<f64>,
}

impl ProgramBalance {
    fn new(enrolled: usize, supplied: usize, team_size_max: usize) -> Self {
        ProgramBalance {
            enrolled_students: enrolled,
            necessary_projects: necessary_projects(enrolled, team_size_max),
            supplied_seats: supplied,
            coverage_ratio: (enrolled > 0).then(|| supplied as f64 / enrolled as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub per_program: BTreeMap<Program, ProgramBalance>,
    pub total: ProgramBalance,
}

pub fn necessary_projects(students: usize, team_size_max: usize) -> usize {
    students.div_ceil(team_size_max.max(1))
}

fn enrolled(cohort: &[Student], config: &SemesterConfig) -> BTreeMap<Program, usize> {
    let mut m: BTreeMap<Program, usize> = config
        .programs
        .iter()
        .map(|p| (p.code.clone(), 0))
        .collect();
    for s in cohort {
        *m.entry(s.program.clone()).or_default() += 1;
    }
    m
}

/// Ideal project counts; supply fields are zero.
pub fn required_projects(cohort: &[Student], config: &SemesterConfig) -> BalanceReport {
    report(cohort, &[], config)
}

/// Seat supply of approved proposals against enrolment.
pub fn coverage(
    proposals: &[&Proposal],
    cohort: &[Student],
    config: &SemesterConfig,
) -> BalanceReport {
    report(cohort, proposals, config)
}

fn report(cohort: &[Student], proposals: &[&Proposal], config: &SemesterConfig) -> BalanceReport {
    let enrolled = enrolled(cohort, config);
    let mut supplied: BTreeMap<&Program, usize> = BTreeMap::new();
    let mut physical = 0;
    for profile in proposals
        .iter()
        .filter(|p| p.is_approved())
        .filter_map(|p| p.seat_profile.as_ref())
    {
        physical += profile.seats.len();
        for seat in &profile.seats {
            for program in seat {
                *supplied.entry(program).or_default() += 1;
            }
        }
    }
    let per_program = enrolled
        .iter()
        .map(|(program, &n)| {
            let s = supplied.get(program).copied().unwrap_or(0);
            (
                program.clone(),
                ProgramBalance::new(n, s, config.team_size_max),
            )
        })
        .collect();
    BalanceReport {
        per_program,
        total: ProgramBalance::new(cohort.len(), physical, config.team_size_max),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcingGap {
    pub area: InterestArea,
    pub student_interest_count: usize,
    pub proposal_count: usize,
    pub gap: bool,
}

/// Interest areas with student demand or proposal supply, most demanded first.
pub fn sourcing_gaps(cohort: &[Student], proposals: &[&Proposal]) -> Vec<SourcingGap> {
    let mut rows: Vec<SourcingGap> = InterestArea::ALL
        .iter()
        .map(|&area| {
            let students = cohort
                .iter()
                .filter(|s| s.interests.contains(&area))
                .count();
            let props = proposals
                .iter()
                .filter(|p| p.form.areas.contains(&area))
                .count();
            SourcingGap {
                area,
                student_interest_count: students,
                proposal_count: props,
                gap: students > 0 && props == 0,
            }
        })
        .filter(|r| r.student_interest_count > 0 || r.proposal_count > 0)
        .collect();
    // stable sort keeps the canonical area order among ties
    rows.sort_by_key(|r| std::cmp::Reverse(r.student_interest_count));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intake::{ConformityChecklist, ProposalForm, ProposalStatus, SeatProfile};
    use proptest::prelude::*;

    fn cohort(program: &str, n: usize) -> Vec<Student> {
        (0..n)
            .map(|i| Student::new(format!("{program}{i:03}"), program, 7.0))
            .collect()
    }

    fn approved(id: &str, profile: SeatProfile, areas: &[InterestArea]) -> Proposal {
        Proposal {
            id: id.into(),
            form: ProposalForm {
                title: id.into(),
                description: "d".into(),
                deliverables: "d".into(),
                resources: None,
                observations: None,
                areas: areas.iter().copied().collect(),
                org_id: "o".into(),
            },
            status: ProposalStatus::Approved,
            checklist: Some(ConformityChecklist::all_pass()),
            seat_profile: Some(profile),
            review_notes: None,
        }
    }

    fn reference_profile() -> SeatProfile {
        SeatProfile::new([
            vec!["EM"],
            vec!["EM"],
            vec!["EX", "EM"],
            vec!["EC", "EX", "EM", "CS"],
        ])
    }

    #[test]
    fn hundred_students_need_twenty_five_projects() {
        let cfg = SemesterConfig::default();
        let r = required_projects(&cohort("EC", 100), &cfg);
        assert_eq!(r.total.necessary_projects, 25);
        assert_eq!(r.total.supplied_seats, 0);
    }

    #[test]
    fn small_counts() {
        let cfg = SemesterConfig::default();
        assert_eq!(required_projects(&[], &cfg).total.necessary_projects, 0);
        assert_eq!(
            required_projects(&cohort("CS", 10), &cfg)
                .total
                .necessary_projects,
            3
        );
    }

    #[test]
    fn reference_profiles_cover_mechanical_cohort() {
        let cfg = SemesterConfig::default();
        let props: Vec<Proposal> = (0..10)
            .map(|i| approved(&format!("P{i}"), reference_profile(), &[]))
            .collect();
        let refs: Vec<&Proposal> = props.iter().collect();
        let r = coverage(&refs, &cohort("EM", 30), &cfg);
        let em = &r.per_program[&Program::new("EM")];
        assert_eq!(em.supplied_seats, 40);
        assert!((em.coverage_ratio.unwrap() - 40.0 / 30.0).abs() < 1e-12);
        // multi-program seats are counted once per allowed program
        let per_program_sum: usize = r.per_program.values().map(|b| b.supplied_seats).sum();
        assert_eq!(r.total.supplied_seats, 40);
        assert_eq!(per_program_sum, 40 + 20 + 10 + 10);
        assert!(per_program_sum > r.total.supplied_seats);
        // nobody enrolled in CS
        assert_eq!(r.per_program[&Program::new("CS")].coverage_ratio, None);
    }

    #[test]
    fn no_supply_and_no_cohort() {
        let cfg = SemesterConfig::default();
        let r = coverage(&[], &cohort("EM", 3), &cfg);
        assert_eq!(r.per_program[&Program::new("EM")].coverage_ratio, Some(0.0));
        let p = approved("P", reference_profile(), &[]);
        let r = coverage(&[&p], &[], &cfg);
        assert!(r.per_program.values().all(|b| b.coverage_ratio.is_none()));
        assert!(r.total.coverage_ratio.is_none());
    }

    #[test]
    fn gaps_flag_unsupplied_interest() {
        let mut c = cohort("EC", 12);
        for s in &mut c {
            s.interests.insert(InterestArea::Robotics);
        }
        c[0].interests.insert(InterestArea::DataScience);
        let p = approved(
            "P",
            reference_profile(),
            &[InterestArea::DataScience, InterestArea::EnergyEfficiency],
        );
        let gaps = sourcing_gaps(&c, &[&p]);
        assert_eq!(gaps[0].area, InterestArea::Robotics);
        assert_eq!(gaps[0].student_interest_count, 12);
        assert!(gaps[0].gap);
        let energy = gaps
            .iter()
            .find(|g| g.area == InterestArea::EnergyEfficiency)
            .unwrap();
        assert!(!energy.gap);
        assert_eq!(energy.student_interest_count, 0);
        assert!(sourcing_gaps(&[], &[]).is_empty());
    }

    proptest! {
        #[test]
        fn necessary_projects_cover_everyone(n in 0usize..5000, max in 1usize..9) {
            prop_assert!(necessary_projects(n, max) * max >= n);
        }

        #[test]
        fn adding_supply_never_lowers_coverage(
            seats in prop::collection::vec(prop::collection::btree_set(0usize..4, 1..4), 1..5),
            n_em in 0usize..20,
            n_cs in 0usize..20,
        ) {
            let cfg = SemesterConfig::default();
            let codes = ["EC", "EX", "EM", "CS"];
            let profile = SeatProfile {
                seats: seats.iter().map(|s| s.iter().map(|&i| Program::new(codes[i])).collect()).collect(),
            };
            let mut students = cohort("EM", n_em);
            students.extend(cohort("CS", n_cs));
            let base = approved("A", reference_profile(), &[]);
            let extra = approved("B", profile, &[]);
            let before = coverage(&[&base], &students, &cfg);
            let after = coverage(&[&base, &extra], &students, &cfg);
            for (prog, b) in &before.per_program {
                let a = &after.per_program[prog];
                prop_assert!(a.coverage_ratio.unwrap_or(0.0) >= b.coverage_ratio.unwrap_or(0.0));
            }
        }
    }
}
