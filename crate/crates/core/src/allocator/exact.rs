//! Exhaustive branch-and-bound search for small instances. Used to measure
//! how far the redistribution heuristic lands from the optimum.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::heuristic::to_allocation;
use super::objective::{Assignment, Problem};
use super::{detect_conflicts, Allocation, Instance, MoveCause, MoveRecord};
use crate::error::{Error, Result};
use crate::model::SemesterConfig;

/// Costs closer than this are treated as ties.
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactLimits {
    pub max_students: usize,
    pub max_proposals: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            max_students: 12,
            max_proposals: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub allocation: Allocation,
    /// Objective total of the best leaf as seen by the search.
    pub cost: f64,
    pub nodes: u64,
}

struct Search<'p, 'a> {
    problem: &'p Problem<'a>,
    /// Per student: (local cost, option) sorted ascending; option `n_projects` is unassigned.
    options: Vec<Vec<(f64, usize)>>,
    /// `rest_lb[i]`: sum of the cheapest local cost of students `i..`.
    rest_lb: Vec<f64>,
    groups: Vec<Vec<usize>>,
    unmatched: Vec<usize>,
    choice: Vec<usize>,
    best_cost: f64,
    best: Vec<usize>,
    nodes: u64,
}

impl Search<'_, '_> {
    fn local_cost(&self, s: usize, option: usize) -> f64 {
        let w = &self.problem.weights;
        if option == self.problem.n_projects() {
            w.w_rank * w.unlisted_rank_penalty
        } else {
            w.w_rank * self.problem.rank_cost[s][option]
                + w.w_interest * self.problem.misalign[s][option]
        }
    }

    fn bound(&self, next: usize, partial: f64) -> Option<f64> {
        let (min, max) = (self.problem.team_size_min, self.problem.team_size_max);
        let remaining = self.problem.n_students() - next;
        let mut need = 0;
        let mut size_lb = 0.0;
        for g in &self.groups {
            let c = g.len();
            if c == 0 {
                continue;
            }
            need += min.saturating_sub(c);
            let reach = (c + remaining).min(max);
            let short = (max - reach) as f64;
            size_lb += short * short;
        }
        if need > remaining {
            return None;
        }
        let seat: usize = self.unmatched.iter().sum();
        let w = &self.problem.weights;
        Some(partial + self.rest_lb[next] + w.w_size * size_lb + w.w_seat * seat as f64)
    }

    fn leaf(&mut self) {
        let (min, max) = (self.problem.team_size_min, self.problem.team_size_max);
        if self
            .groups
            .iter()
            .any(|g| !g.is_empty() && (g.len() < min || g.len() > max))
        {
            return;
        }
        let a = Assignment {
            of: self.decode(&self.choice),
            groups: self.groups.clone(),
        };
        let cost = self.problem.evaluate(&a).total;
        let better = cost < self.best_cost - TIE_EPS
            || (cost <= self.best_cost + TIE_EPS && self.choice < self.best);
        if better {
            self.best_cost = cost;
            self.best = self.choice.clone();
        }
    }

    fn decode(&self, v: &[usize]) -> Vec<Option<usize>> {
        let np = self.problem.n_projects();
        v.iter().map(|&o| (o < np).then_some(o)).collect()
    }

    fn dfs(&mut self, s: usize, partial: f64) {
        self.nodes += 1;
        if s == self.problem.n_students() {
            self.leaf();
            return;
        }
        let np = self.problem.n_projects();
        let max = self.problem.team_size_max;
        for k in 0..self.options[s].len() {
            let (cost, option) = self.options[s][k];
            if option < np && self.groups[option].len() >= max {
                continue;
            }
            let prev_unmatched = if option < np {
                self.unmatched[option]
            } else {
                0
            };
            if option < np {
                let g = &mut self.groups[option];
                g.push(s); // students are visited in ascending order
                self.unmatched[option] = self.problem.unmatched(option, &self.groups[option]);
            }
            self.choice[s] = option;
            let next = partial + cost;
            if let Some(lb) = self.bound(s + 1, next) {
                if lb <= self.best_cost + TIE_EPS {
                    self.dfs(s + 1, next);
                }
            }
            if option < np {
                self.groups[option].pop();
                self.unmatched[option] = prev_unmatched;
            }
        }
        self.choice[s] = np;
    }
}

/// Minimum-objective allocation over every way of placing students into
/// groups of size zero or within `[team_size_min, team_size_max]`, with
/// leaving a student unassigned as an option. Equal costs resolve to the
/// lexicographically smallest assignment vector (students in id order,
/// projects by id, unassigned last).
pub fn exact_allocate(
    instance: &Instance,
    config: &SemesterConfig,
    limits: ExactLimits,
) -> Result<ExactResult> {
    let problem = Problem::new(instance, config)?;
    if problem.n_students() > limits.max_students {
        return Err(Error::OracleLimit(format!(
            "{} students, limit {}",
            problem.n_students(),
            limits.max_students
        )));
    }
    if problem.n_projects() > limits.max_proposals {
        return Err(Error::OracleLimit(format!(
            "{} proposals, limit {}",
            problem.n_projects(),
            limits.max_proposals
        )));
    }
    let n = problem.n_students();
    let np = problem.n_projects();

    let all_unassigned = vec![np; n];
    let seed = Assignment::from_vec(vec![None; n], np);
    let mut search = Search {
        problem: &problem,
        options: Vec::new(),
        rest_lb: vec![0.0; n + 1],
        groups: vec![Vec::new(); np],
        unmatched: vec![0; np],
        choice: all_unassigned.clone(),
        best_cost: problem.evaluate(&seed).total,
        best: all_unassigned,
        nodes: 0,
    };
    search.options = (0..n)
        .map(|s| {
            let mut o: Vec<(f64, usize)> = (0..=np).map(|p| (search.local_cost(s, p), p)).collect();
            o.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            o
        })
        .collect();
    for s in (0..n).rev() {
        search.rest_lb[s] = search.rest_lb[s + 1] + search.options[s][0].0;
    }
    search.dfs(0, 0.0);

    let best = Assignment::from_vec(search.decode(&search.best), np);
    let cost = search.best_cost;
    let nodes = search.nodes;
    let provenance = (0..n)
        .map(|s| {
            let id = problem.student_id(s).clone();
            let rec = MoveRecord {
                student_id: id.clone(),
                from: None,
                to: best.of[s].map(|p| problem.project_id(p).clone()),
                cause: MoveCause::Initial,
                objective_delta: 0.0,
            };
            (id, vec![rec])
        })
        .collect::<BTreeMap<_, _>>();
    let mut allocation = to_allocation(&problem, &best, provenance, detect_conflicts(instance));
    allocation.refresh_flags(config.team_size_min, config.team_size_max);
    Ok(ExactResult {
        allocation,
        cost,
        nodes,
    })
}
