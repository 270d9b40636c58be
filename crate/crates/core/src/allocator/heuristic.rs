use std::collections::{BTreeMap, BTreeSet};

use super::objective::{Assignment, GroupTerms, ObjectiveBreakdown, Problem};
use super::{detect_conflicts, Allocation, Instance, MoveCause, MoveRecord};
use crate::error::{Error, Result};
use crate::model::{ProposalId, SemesterConfig, StudentId};

/// Seeds every student with a ballot onto their first listed project.
pub fn initial_assignment(instance: &Instance, config: &SemesterConfig) -> Result<Allocation> {
    let problem = Problem::new(instance, config)?;
    let of: Vec<Option<usize>> = (0..problem.n_students())
        .map(|s| {
            (0..problem.n_projects())
                .filter_map(|p| problem.rank[s][p].map(|r| (r, p)))
                .min()
                .map(|(_, p)| p)
        })
        .collect();
    let a = Assignment::from_vec(of, problem.n_projects());
    let provenance = (0..problem.n_students())
        .map(|s| {
            let id = problem.student_id(s).clone();
            let rec = MoveRecord {
                student_id: id.clone(),
                from: None,
                to: a.of[s].map(|p| problem.project_id(p).clone()),
                cause: MoveCause::Initial,
                objective_delta: 0.0,
            };
            (id, vec![rec])
        })
        .collect();
    let mut out = to_allocation(&problem, &a, provenance, Vec::new());
    out.refresh_flags(config.team_size_min, config.team_size_max);
    Ok(out)
}

pub(crate) fn to_allocation(
    problem: &Problem,
    a: &Assignment,
    provenance: BTreeMap<StudentId, Vec<MoveRecord>>,
    conflicts: Vec<super::ConflictFlag>,
) -> Allocation {
    let groups: BTreeMap<ProposalId, BTreeSet<StudentId>> = a
        .groups
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(p, m)| {
            (
                problem.project_id(p).clone(),
                m.iter().map(|&s| problem.student_id(s).clone()).collect(),
            )
        })
        .collect();
    let unassigned =
        a.of.iter()
            .enumerate()
            .filter(|(_, g)| g.is_none())
            .map(|(s, _)| problem.student_id(s).clone())
            .collect();
    Allocation {
        groups,
        unassigned,
        provenance,
        objective: problem.evaluate(a),
        conflicts,
        flags: Vec::new(),
        finalized: false,
    }
}

/// Incremental evaluator. `terms[p]` always equals `group_terms(p, groups[p])`,
/// so folding it gives the same bits as a full evaluation.
struct Engine<'p, 'a> {
    problem: &'p Problem<'a>,
    a: Assignment,
    terms: Vec<Option<GroupTerms>>,
    unassigned: usize,
    current: ObjectiveBreakdown,
    provenance: BTreeMap<StudentId, Vec<MoveRecord>>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    student: usize,
    target: Option<usize>,
    delta: f64,
}

impl<'p, 'a> Engine<'p, 'a> {
    fn new(
        problem: &'p Problem<'a>,
        a: Assignment,
        provenance: BTreeMap<StudentId, Vec<MoveRecord>>,
    ) -> Self {
        let terms: Vec<_> = a
            .groups
            .iter()
            .enumerate()
            .map(|(p, m)| problem.group_terms(p, m))
            .collect();
        let unassigned = a.unassigned_count();
        let current = problem.fold(terms.iter().copied(), unassigned);
        Engine {
            problem,
            a,
            terms,
            unassigned,
            current,
            provenance,
        }
    }

    fn size(&self, p: usize) -> usize {
        self.a.groups[p].len()
    }

    fn moved_terms(&self, s: usize, to: Option<usize>) -> (Option<GroupTerms>, Option<GroupTerms>) {
        let from = self.a.of[s];
        let from_terms = from.map(|p| {
            let m: Vec<usize> = self.a.groups[p]
                .iter()
                .copied()
                .filter(|&x| x != s)
                .collect();
            self.problem.group_terms(p, &m)
        });
        let to_terms = to.map(|p| {
            let g = &self.a.groups[p];
            let mut m = Vec::with_capacity(g.len() + 1);
            let at = g.partition_point(|&x| x < s);
            m.extend_from_slice(&g[..at]);
            m.push(s);
            m.extend_from_slice(&g[at..]);
            self.problem.group_terms(p, &m)
        });
        (from_terms.flatten(), to_terms.flatten())
    }

    fn breakdown_after(&self, s: usize, to: Option<usize>) -> ObjectiveBreakdown {
        let from = self.a.of[s];
        debug_assert_ne!(from, to);
        let (tf, tt) = self.moved_terms(s, to);
        let unassigned = self.unassigned + usize::from(to.is_none()) - usize::from(from.is_none());
        let terms = self.terms.iter().enumerate().map(|(p, t)| {
            if Some(p) == from {
                tf
            } else if Some(p) == to {
                tt
            } else {
                *t
            }
        });
        self.problem.fold(terms, unassigned)
    }

    fn execute(&mut self, c: Candidate, cause: MoveCause) {
        let from = self.a.of[c.student];
        let after = self.breakdown_after(c.student, c.target);
        let (tf, tt) = self.moved_terms(c.student, c.target);
        if let Some(p) = from {
            self.terms[p] = tf;
        } else {
            self.unassigned -= 1;
        }
        if let Some(p) = c.target {
            self.terms[p] = tt;
        } else {
            self.unassigned += 1;
        }
        self.a.set(c.student, c.target);
        let delta = after.total - self.current.total;
        self.current = after;
        let id = self.problem.student_id(c.student).clone();
        self.provenance
            .entry(id.clone())
            .or_default()
            .push(MoveRecord {
                student_id: id,
                from: from.map(|p| self.problem.project_id(p).clone()),
                to: c.target.map(|p| self.problem.project_id(p).clone()),
                cause,
                objective_delta: delta,
            });
    }

    /// Lowest-delta move among `students` x `targets(s)`; ties go to the
    /// lowest student index, then the lowest target.
    fn best_move<F>(&self, students: &[usize], targets: F) -> Option<Candidate>
    where
        F: Fn(usize) -> Vec<Option<usize>>,
    {
        let mut best: Option<Candidate> = None;
        for &s in students {
            for t in targets(s) {
                let delta = self.breakdown_after(s, t).total - self.current.total;
                if best.is_none_or(|b| delta < b.delta) {
                    best = Some(Candidate {
                        student: s,
                        target: t,
                        delta,
                    });
                }
            }
        }
        best
    }

    fn listed(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.problem.n_projects()).filter(move |&p| self.problem.rank[s][p].is_some())
    }

    fn has_heuristic_move(&self, s: usize) -> bool {
        self.provenance
            .get(self.problem.student_id(s))
            .is_some_and(|v| v.iter().any(|m| m.cause != MoveCause::Initial))
    }

    fn has_drain_or_close(&self, s: usize) -> bool {
        self.provenance
            .get(self.problem.student_id(s))
            .is_some_and(|v| {
                v.iter().any(|m| {
                    matches!(
                        m.cause,
                        MoveCause::OversubscribedDrain | MoveCause::GroupClosed
                    )
                })
            })
    }

    /// Moves members out of oversubscribed groups, largest group first.
    fn drain(&mut self) {
        let max = self.problem.team_size_max;
        while let Some(src) = (0..self.problem.n_projects())
            .filter(|&p| self.size(p) > max)
            .max_by(|&x, &y| self.size(x).cmp(&self.size(y)).then(y.cmp(&x)))
        {
            let members = self.a.groups[src].clone();
            // Only students still on their initial placement; manual states
            // may need the wider fallbacks.
            let mut cands: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&s| !self.has_heuristic_move(s))
                .collect();
            if cands.is_empty() {
                cands = members
                    .iter()
                    .copied()
                    .filter(|&s| !self.has_drain_or_close(s))
                    .collect();
            }
            if cands.is_empty() {
                cands = members;
            }
            let tiers: [&dyn Fn(usize) -> Vec<Option<usize>>; 4] = [
                &|s| {
                    self.listed(s)
                        .filter(|&p| p != src && (2..max).contains(&self.size(p)))
                        .map(Some)
                        .collect()
                },
                &|s| {
                    self.listed(s)
                        .filter(|&p| p != src && self.size(p) == 1 && max > 1)
                        .map(Some)
                        .collect()
                },
                &|s| {
                    self.listed(s)
                        .filter(|&p| self.size(p) == 0)
                        .map(Some)
                        .collect()
                },
                &|_| vec![None],
            ];
            let choice = tiers.iter().find_map(|t| self.best_move(&cands, t));
            let c = choice.expect("unassigned tier always yields a move");
            self.execute(c, MoveCause::OversubscribedDrain);
        }
    }

    /// Dissolves groups below the minimum size, smallest first. Members only
    /// join groups that end up within bounds, so no group is closed twice
    /// and nobody moves twice for a closure.
    fn close_small_groups(&mut self) {
        let (min, max) = (self.problem.team_size_min, self.problem.team_size_max);
        let lo = min.saturating_sub(1).max(1);
        while let Some(g) = (0..self.problem.n_projects())
            .filter(|&p| (1..min).contains(&self.size(p)))
            .min_by_key(|&p| (self.size(p), p))
        {
            while !self.a.groups[g].is_empty() {
                let members = self.a.groups[g].clone();
                let tiers: [&dyn Fn(usize) -> Vec<Option<usize>>; 3] = [
                    &|s| {
                        self.listed(s)
                            .filter(|&p| p != g && (lo.max(2)..max).contains(&self.size(p)))
                            .map(Some)
                            .collect()
                    },
                    &|s| {
                        self.listed(s)
                            .filter(|&p| p != g && lo <= 1 && self.size(p) == 1 && max > 1)
                            .map(Some)
                            .collect()
                    },
                    &|_| vec![None],
                ];
                let c = tiers
                    .iter()
                    .find_map(|t| self.best_move(&members, t))
                    .expect("unassigned tier always yields a move");
                self.execute(c, MoveCause::GroupClosed);
            }
        }
    }
}

/// Drains oversubscribed groups, then closes undersized ones. Deterministic:
/// all ties are broken by id order.
pub fn redistribute(
    allocation: &Allocation,
    instance: &Instance,
    config: &SemesterConfig,
) -> Result<Allocation> {
    if allocation.finalized {
        return Err(Error::Finalized);
    }
    let problem = Problem::new(instance, config)?;
    let a = problem.assignment_of(allocation)?;
    let mut engine = Engine::new(&problem, a, allocation.provenance.clone());
    engine.drain();
    engine.close_small_groups();
    let mut out = to_allocation(
        &problem,
        &engine.a,
        engine.provenance,
        allocation.conflicts.clone(),
    );
    debug_assert_eq!(
        out.objective.total.to_bits(),
        engine.current.total.to_bits()
    );
    out.refresh_flags(config.team_size_min, config.team_size_max);
    Ok(out)
}

/// First-choice seeding, redistribution and conflict screening.
pub fn allocate(instance: &Instance, config: &SemesterConfig) -> Result<Allocation> {
    let initial = initial_assignment(instance, config)?;
    let mut out = redistribute(&initial, instance, config)?;
    out.conflicts = detect_conflicts(instance);
    Ok(out)
}
