use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::matching::{eligibility_mask, max_matching};
use super::{Allocation, Instance};
use crate::ballots::{alignment_score, Ballot};
use crate::error::{Error, Result};
use crate::intake::Proposal;
use crate::model::{ProposalId, SemesterConfig, Student, StudentId, WeightSet};

/// Raw (unweighted) cost components and their weighted total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub rank_cost: f64,
    pub size_cost: f64,
    pub gpa_spread_cost: f64,
    pub interest_cost: f64,
    pub seat_cost: f64,
    pub total: f64,
}

/// Cost contributions of one open group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GroupTerms {
    pub rank: f64,
    pub size: f64,
    pub interest: f64,
    pub seat: f64,
    pub gpa_mean: f64,
}

/// Index-based view of an instance. Students and projects are ordered by id.
pub(crate) struct Problem<'a> {
    pub weights: WeightSet,
    pub team_size_max: usize,
    pub team_size_min: usize,
    pub students: Vec<&'a Student>,
    pub student_index: HashMap<&'a StudentId, usize>,
    pub projects: Vec<&'a Proposal>,
    pub project_index: HashMap<&'a ProposalId, usize>,
    /// `[student][project]`, 1-based rank when listed.
    pub rank: Vec<Vec<Option<usize>>>,
    pub rank_cost: Vec<Vec<f64>>,
    pub misalign: Vec<Vec<f64>>,
    pub gpa: Vec<f64>,
    /// `[project][student]` seat eligibility; `None` when the project has no profile.
    pub seat_mask: Vec<Option<Vec<u64>>>,
}

impl<'a> Problem<'a> {
    pub fn new(instance: &'a Instance, config: &SemesterConfig) -> Result<Self> {
        Self::with_weights(instance, config, config.objective_weights)
    }

    pub fn with_weights(
        instance: &'a Instance,
        config: &SemesterConfig,
        weights: WeightSet,
    ) -> Result<Self> {
        let mut students: Vec<&Student> = instance.students.iter().collect();
        students.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = students.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Duplicate {
                kind: "student",
                id: w[0].id.to_string(),
            });
        }
        let mut projects: Vec<&Proposal> = instance
            .proposals
            .iter()
            .filter(|p| p.is_approved())
            .collect();
        projects.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = projects.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Duplicate {
                kind: "proposal",
                id: w[0].id.to_string(),
            });
        }
        let student_index: HashMap<_, _> = students
            .iter()
            .enumerate()
            .map(|(i, s)| (&s.id, i))
            .collect();
        let project_index: HashMap<_, _> = projects
            .iter()
            .enumerate()
            .map(|(i, p)| (&p.id, i))
            .collect();

        let mut ballot_of: Vec<Option<&Ballot>> = vec![None; students.len()];
        for b in &instance.ballots {
            if let Some(&i) = student_index.get(&b.student_id) {
                ballot_of[i] = Some(b);
            }
        }

        let penalty = weights.unlisted_rank_penalty;
        let rank: Vec<Vec<Option<usize>>> = ballot_of
            .iter()
            .map(|b| {
                projects
                    .iter()
                    .map(|p| b.and_then(|b| b.rank_of(&p.id)))
                    .collect()
            })
            .collect();
        let rank_cost = rank
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| r.map_or(penalty, |r| (r - 1) as f64))
                    .collect()
            })
            .collect();
        let misalign = students
            .iter()
            .map(|s| {
                projects
                    .iter()
                    .map(|p| 1.0 - alignment_score(&s.interests, &p.form.areas))
                    .collect()
            })
            .collect();
        let gpa = students
            .iter()
            .map(|s| s.gpa / config.gpa_scale_max)
            .collect();
        let seat_mask = projects
            .iter()
            .map(|p| {
                p.seat_profile.as_ref().map(|profile| {
                    students
                        .iter()
                        .map(|s| eligibility_mask(&s.program, profile))
                        .collect()
                })
            })
            .collect();

        Ok(Problem {
            weights,
            team_size_max: config.team_size_max,
            team_size_min: config.team_size_min,
            students,
            student_index,
            projects,
            project_index,
            rank,
            rank_cost,
            misalign,
            gpa,
            seat_mask,
        })
    }

    pub fn n_students(&self) -> usize {
        self.students.len()
    }

    pub fn n_projects(&self) -> usize {
        self.projects.len()
    }

    /// Members must be sorted ascending.
    pub fn unmatched(&self, project: usize, members: &[usize]) -> usize {
        match &self.seat_mask[project] {
            None => 0,
            Some(masks) => {
                let adj: Vec<u64> = members.iter().map(|&s| masks[s]).collect();
                members.len() - max_matching(&adj)
            }
        }
    }

    /// Members must be sorted ascending; `None` for an empty group.
    pub fn group_terms(&self, project: usize, members: &[usize]) -> Option<GroupTerms> {
        if members.is_empty() {
            return None;
        }
        let mut rank = 0.0;
        let mut interest = 0.0;
        let mut gpa = 0.0;
        for &s in members {
            rank += self.rank_cost[s][project];
            interest += self.misalign[s][project];
            gpa += self.gpa[s];
        }
        let shortfall = self.team_size_max as f64 - members.len() as f64;
        Some(GroupTerms {
            rank,
            size: shortfall * shortfall,
            interest,
            seat: self.unmatched(project, members) as f64,
            gpa_mean: gpa / members.len() as f64,
        })
    }

    /// Combines per-group terms, visited in project order, into a breakdown.
    pub fn fold<I>(&self, terms: I, unassigned: usize) -> ObjectiveBreakdown
    where
        I: IntoIterator<Item = Option<GroupTerms>>,
    {
        let mut b = ObjectiveBreakdown::default();
        let mut means = Vec::with_capacity(self.projects.len());
        for t in terms.into_iter().flatten() {
            b.rank_cost += t.rank;
            b.size_cost += t.size;
            b.interest_cost += t.interest;
            b.seat_cost += t.seat;
            means.push(t.gpa_mean);
        }
        b.rank_cost += unassigned as f64 * self.weights.unlisted_rank_penalty;
        b.gpa_spread_cost = population_std(&means);
        let w = &self.weights;
        b.total = w.w_rank * b.rank_cost
            + w.w_size * b.size_cost
            + w.w_gpa * b.gpa_spread_cost
            + w.w_interest * b.interest_cost
            + w.w_seat * b.seat_cost;
        b
    }

    pub fn evaluate(&self, a: &Assignment) -> ObjectiveBreakdown {
        let unassigned = a.of.iter().filter(|g| g.is_none()).count();
        self.fold(
            a.groups
                .iter()
                .enumerate()
                .map(|(p, m)| self.group_terms(p, m)),
            unassigned,
        )
    }

    pub fn student_id(&self, s: usize) -> &'a StudentId {
        &self.students[s].id
    }

    pub fn project_id(&self, p: usize) -> &'a ProposalId {
        &self.projects[p].id
    }

    pub fn lookup_student(&self, id: &StudentId) -> Result<usize> {
        self.student_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Unknown {
                kind: "student",
                id: id.to_string(),
            })
    }

    pub fn lookup_project(&self, id: &ProposalId) -> Result<usize> {
        self.project_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Unknown {
                kind: "proposal",
                id: id.to_string(),
            })
    }

    /// Index form of an allocation; fails unless it partitions the cohort.
    pub fn assignment_of(&self, allocation: &Allocation) -> Result<Assignment> {
        let mut of: Vec<Option<Option<usize>>> = vec![None; self.n_students()];
        let mut place = |sid: &StudentId, g: Option<usize>| -> Result<()> {
            let s = self.lookup_student(sid)?;
            if of[s].is_some() {
                return Err(Error::Integrity(format!("student {sid} placed twice")));
            }
            of[s] = Some(g);
            Ok(())
        };
        for (pid, members) in &allocation.groups {
            let p = self.lookup_project(pid)?;
            for sid in members {
                place(sid, Some(p))?;
            }
        }
        for sid in &allocation.unassigned {
            place(sid, None)?;
        }
        let of: Vec<Option<usize>> = of
            .into_iter()
            .enumerate()
            .map(|(s, g)| {
                g.ok_or_else(|| {
                    Error::Integrity(format!(
                        "student {} missing from allocation",
                        self.student_id(s)
                    ))
                })
            })
            .collect::<Result<_>>()?;
        Ok(Assignment::from_vec(of, self.n_projects()))
    }
}

fn population_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    var.sqrt()
}

/// Student-to-project vector plus sorted member lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Assignment {
    pub of: Vec<Option<usize>>,
    pub groups: Vec<Vec<usize>>,
}

impl Assignment {
    pub fn from_vec(of: Vec<Option<usize>>, n_projects: usize) -> Self {
        let mut groups = vec![Vec::new(); n_projects];
        for (s, g) in of.iter().enumerate() {
            if let Some(p) = g {
                groups[*p].push(s);
            }
        }
        Assignment { of, groups }
    }

    pub fn set(&mut self, s: usize, to: Option<usize>) {
        if let Some(p) = self.of[s] {
            self.groups[p].retain(|&x| x != s);
        }
        if let Some(p) = to {
            let g = &mut self.groups[p];
            let at = g.partition_point(|&x| x < s);
            g.insert(at, s);
        }
        self.of[s] = to;
    }

    pub fn unassigned_count(&self) -> usize {
        self.of.iter().filter(|g| g.is_none()).count()
    }
}

/// Objective of an allocation under the given weights.
pub fn objective(
    allocation: &Allocation,
    instance: &Instance,
    weights: &WeightSet,
    config: &SemesterConfig,
) -> Result<ObjectiveBreakdown> {
    let problem = Problem::with_weights(instance, config, *weights)?;
    let a = problem.assignment_of(allocation)?;
    Ok(problem.evaluate(&a))
}
