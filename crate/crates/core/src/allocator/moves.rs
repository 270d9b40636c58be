use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::heuristic::to_allocation;
use super::objective::{Assignment, ObjectiveBreakdown, Problem};
use super::{
    detect_conflicts, seat_feasibility, Allocation, ConflictFlag, ConflictStatus, Instance,
    MoveCause, MoveRecord, SeatFeasibility,
};
use crate::error::{Error, Result};
use crate::model::{ProposalId, SemesterConfig, Student, StudentId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatChange {
    pub proposal_id: ProposalId,
    pub before: SeatFeasibility,
    pub after: SeatFeasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovePreview {
    pub student_id: StudentId,
    pub from: Option<ProposalId>,
    pub to: Option<ProposalId>,
    pub objective_before: ObjectiveBreakdown,
    pub objective_after: ObjectiveBreakdown,
    pub objective_delta: f64,
    /// Sizes of the source and target groups after the move.
    pub new_sizes: BTreeMap<ProposalId, usize>,
    pub seat_feasibility_changes: Vec<SeatChange>,
    pub conflict_flags_triggered: Vec<ConflictFlag>,
}

struct Simulated<'a> {
    problem: Problem<'a>,
    before: Assignment,
    after: Assignment,
    student: usize,
    preview: MovePreview,
}

fn members<'a>(problem: &Problem<'a>, a: &Assignment, p: usize) -> Vec<&'a Student> {
    a.groups[p].iter().map(|&s| problem.students[s]).collect()
}

fn simulate<'a>(
    allocation: &Allocation,
    student: &StudentId,
    target: Option<&ProposalId>,
    instance: &'a Instance,
    config: &SemesterConfig,
) -> Result<Simulated<'a>> {
    let problem = Problem::new(instance, config)?;
    let before = problem.assignment_of(allocation)?;
    let s = problem.lookup_student(student)?;
    let to = target.map(|t| problem.lookup_project(t)).transpose()?;
    let from = before.of[s];
    let mut after = before.clone();
    after.set(s, to);

    let objective_before = problem.evaluate(&before);
    let objective_after = problem.evaluate(&after);

    let touched: Vec<usize> = from.into_iter().chain(to).collect();
    let new_sizes = touched
        .iter()
        .map(|&p| (problem.project_id(p).clone(), after.groups[p].len()))
        .collect();
    let seat_feasibility_changes = touched
        .iter()
        .filter(|_| from != to)
        .filter_map(|&p| {
            let profile = problem.projects[p].seat_profile.as_ref()?;
            Some(SeatChange {
                proposal_id: problem.project_id(p).clone(),
                before: seat_feasibility(&members(&problem, &before, p), profile),
                after: seat_feasibility(&members(&problem, &after, p), profile),
            })
        })
        .collect();

    let conflict_flags_triggered = match target {
        None => Vec::new(),
        Some(t) => {
            let recorded: BTreeMap<_, _> = allocation
                .conflicts
                .iter()
                .filter(|f| &f.student_id == student && &f.proposal_id == t)
                .map(|f| (f.kind, f.status))
                .collect();
            detect_conflicts(instance)
                .into_iter()
                .filter(|f| &f.student_id == student && &f.proposal_id == t)
                .map(|mut f| {
                    if let Some(&status) = recorded.get(&f.kind) {
                        f.status = status;
                    }
                    f
                })
                .collect()
        }
    };

    let preview = MovePreview {
        student_id: student.clone(),
        from: from.map(|p| problem.project_id(p).clone()),
        to: to.map(|p| problem.project_id(p).clone()),
        objective_delta: objective_after.total - objective_before.total,
        objective_before,
        objective_after,
        new_sizes,
        seat_feasibility_changes,
        conflict_flags_triggered,
    };
    Ok(Simulated {
        problem,
        before,
        after,
        student: s,
        preview,
    })
}

/// Evaluates moving one student (`target = None` means unassigned) without
/// touching the allocation.
pub fn what_if_move(
    allocation: &Allocation,
    student: &StudentId,
    target: Option<&ProposalId>,
    instance: &Instance,
    config: &SemesterConfig,
) -> Result<MovePreview> {
    simulate(allocation, student, target, instance, config).map(|s| s.preview)
}

/// Executes a manual move. Size bounds and blocking conflicts do not stop
/// the move; they surface as flags and gate [`finalize`] instead.
pub fn apply_move(
    allocation: &Allocation,
    student: &StudentId,
    target: Option<&ProposalId>,
    instance: &Instance,
    config: &SemesterConfig,
) -> Result<Allocation> {
    if allocation.finalized {
        return Err(Error::Finalized);
    }
    let sim = simulate(allocation, student, target, instance, config)?;
    let mut provenance = allocation.provenance.clone();
    if sim.before.of[sim.student] != sim.after.of[sim.student] {
        provenance
            .entry(student.clone())
            .or_default()
            .push(MoveRecord {
                student_id: student.clone(),
                from: sim.preview.from.clone(),
                to: sim.preview.to.clone(),
                cause: MoveCause::Manual,
                objective_delta: sim.preview.objective_delta,
            });
    }
    let mut out = to_allocation(
        &sim.problem,
        &sim.after,
        provenance,
        allocation.conflicts.clone(),
    );
    out.refresh_flags(config.team_size_min, config.team_size_max);
    Ok(out)
}

/// Freezes the allocation once every group is within bounds, everyone is
/// placed and no conflict on an actual placement is left undecided.
pub fn finalize(allocation: &Allocation, config: &SemesterConfig) -> Result<Allocation> {
    if allocation.finalized {
        return Err(Error::Finalized);
    }
    let mut violations = Vec::new();
    for (p, members) in &allocation.groups {
        let n = members.len();
        if n < config.team_size_min || n > config.team_size_max {
            violations.push(format!(
                "group {p} has {n} members, outside [{}, {}]",
                config.team_size_min, config.team_size_max
            ));
        }
    }
    for s in &allocation.unassigned {
        violations.push(format!("student {s} is unassigned"));
    }
    for f in &allocation.conflicts {
        let placed = allocation
            .groups
            .get(&f.proposal_id)
            .is_some_and(|m| m.contains(&f.student_id));
        if placed && f.status != ConflictStatus::Waived {
            let status = match f.status {
                ConflictStatus::Blocking => "blocking",
                _ => "unresolved",
            };
            violations.push(format!(
                "{status} {:?} conflict: student {} on proposal {} ({})",
                f.kind, f.student_id, f.proposal_id, f.matched_org
            ));
        }
    }
    if !violations.is_empty() {
        return Err(Error::FinalizeRejected(violations));
    }
    let mut out = allocation.clone();
    out.finalized = true;
    Ok(out)
}
