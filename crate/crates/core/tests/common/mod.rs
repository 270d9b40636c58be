//! Reference implementations written straight from the definitions, kept
//! independent of the library's indexed evaluator.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use capstone_core::allocator::{Allocation, Instance};
use capstone_core::intake::SeatProfile;
use capstone_core::model::{ProposalId, SemesterConfig, Student, StudentId};

/// Largest number of members that can hold distinct seats, by trying every
/// seat (or none) for each member in turn.
pub fn brute_matching(members: &[&Student], profile: &SeatProfile) -> usize {
    fn go(i: usize, members: &[&Student], profile: &SeatProfile, used: &mut Vec<bool>) -> usize {
        if i == members.len() {
            return 0;
        }
        let mut best = go(i + 1, members, profile, used);
        for (k, seat) in profile.seats.iter().enumerate() {
            if !used[k] && seat.contains(&members[i].program) {
                used[k] = true;
                best = best.max(1 + go(i + 1, members, profile, used));
                used[k] = false;
            }
        }
        best
    }
    go(0, members, profile, &mut vec![false; profile.seats.len()])
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

/// Objective total computed from groups and ballots directly.
pub fn oracle_objective(
    groups: &BTreeMap<ProposalId, Vec<StudentId>>,
    unassigned: usize,
    inst: &Instance,
    cfg: &SemesterConfig,
) -> f64 {
    let w = &cfg.objective_weights;
    let student = |id: &StudentId| inst.students.iter().find(|s| &s.id == id).unwrap();
    let ballot = |id: &StudentId| inst.ballots.iter().find(|b| &b.student_id == id);
    let mut rank = unassigned as f64 * w.unlisted_rank_penalty;
    let mut size = 0.0;
    let mut interest = 0.0;
    let mut seat = 0.0;
    let mut means = Vec::new();
    for (pid, members) in groups.iter().filter(|(_, m)| !m.is_empty()) {
        let p = inst.proposals.iter().find(|p| &p.id == pid).unwrap();
        let ss: Vec<&Student> = members.iter().map(student).collect();
        for s in &ss {
            let r = ballot(&s.id).and_then(|b| b.choices.iter().position(|c| c == pid));
            rank += r.map_or(w.unlisted_rank_penalty, |r| r as f64);
            interest += 1.0 - jaccard(&s.interests, &p.form.areas);
        }
        let short = cfg.team_size_max as f64 - ss.len() as f64;
        size += short * short;
        if let Some(profile) = &p.seat_profile {
            seat += (ss.len() - brute_matching(&ss, profile)) as f64;
        }
        means.push(ss.iter().map(|s| s.gpa / cfg.gpa_scale_max).sum::<f64>() / ss.len() as f64);
    }
    let spread = if means.len() < 2 {
        0.0
    } else {
        let m = means.iter().sum::<f64>() / means.len() as f64;
        (means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / means.len() as f64).sqrt()
    };
    w.w_rank * rank + w.w_size * size + w.w_gpa * spread + w.w_interest * interest + w.w_seat * seat
}

pub fn oracle_of_allocation(a: &Allocation, inst: &Instance, cfg: &SemesterConfig) -> f64 {
    let groups = a
        .groups
        .iter()
        .map(|(p, m)| (p.clone(), m.iter().cloned().collect()))
        .collect();
    oracle_objective(&groups, a.unassigned.len(), inst, cfg)
}

/// Minimum objective over every assignment with group sizes in
/// {0} and [min, max], students optionally unassigned. Returns the cost
/// and the lexicographically smallest optimal vector (students by id,
/// projects by id, `n_projects` meaning unassigned).
pub fn enumerate_optimum(inst: &Instance, cfg: &SemesterConfig) -> (f64, Vec<usize>) {
    let mut sids: Vec<StudentId> = inst.students.iter().map(|s| s.id.clone()).collect();
    sids.sort();
    let mut pids: Vec<ProposalId> = inst
        .proposals
        .iter()
        .filter(|p| p.is_approved())
        .map(|p| p.id.clone())
        .collect();
    pids.sort();
    let n = sids.len();
    let k = pids.len() + 1;
    let mut best = (f64::INFINITY, Vec::new());
    let mut v = vec![0usize; n];
    loop {
        let mut counts = vec![0usize; pids.len()];
        for &x in &v {
            if x < pids.len() {
                counts[x] += 1;
            }
        }
        if counts
            .iter()
            .all(|&c| c == 0 || (cfg.team_size_min..=cfg.team_size_max).contains(&c))
        {
            let mut groups: BTreeMap<ProposalId, Vec<StudentId>> = BTreeMap::new();
            for (i, &x) in v.iter().enumerate() {
                if x < pids.len() {
                    groups
                        .entry(pids[x].clone())
                        .or_default()
                        .push(sids[i].clone());
                }
            }
            let unassigned = v.iter().filter(|&&x| x == pids.len()).count();
            let c = oracle_objective(&groups, unassigned, inst, cfg);
            // odometer order visits vectors in increasing lexicographic order
            if c < best.0 - 1e-9 {
                best = (c, v.clone());
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            v[i] += 1;
            if v[i] < k {
                break;
            }
            v[i] = 0;
        }
    }
}

/// Assignment vector of an allocation in the same encoding as [`enumerate_optimum`].
pub fn vector_of(a: &Allocation, inst: &Instance) -> Vec<usize> {
    let mut sids: Vec<&StudentId> = inst.students.iter().map(|s| &s.id).collect();
    sids.sort();
    let mut pids: Vec<&ProposalId> = inst
        .proposals
        .iter()
        .filter(|p| p.is_approved())
        .map(|p| &p.id)
        .collect();
    pids.sort();
    sids.iter()
        .map(|s| {
            a.group_of(s)
                .map_or(pids.len(), |p| pids.iter().position(|x| *x == p).unwrap())
        })
        .collect()
}

/// Structural checks on a heuristic allocation, independent of the allocator.
pub fn check_structure(
    a: &Allocation,
    inst: &Instance,
    cfg: &SemesterConfig,
) -> Result<(), String> {
    use capstone_core::allocator::MoveCause;
    let mut seen = BTreeSet::new();
    for members in a.groups.values() {
        if members.is_empty() {
            return Err("empty group listed".into());
        }
        if members.len() > cfg.team_size_max {
            return Err(format!("group of {} above max", members.len()));
        }
        for s in members {
            if !seen.insert(s.clone()) {
                return Err(format!("{s} placed twice"));
            }
        }
    }
    for s in &a.unassigned {
        if !seen.insert(s.clone()) {
            return Err(format!("{s} placed twice"));
        }
    }
    let all: BTreeSet<StudentId> = inst.students.iter().map(|s| s.id.clone()).collect();
    if seen != all {
        return Err("allocation does not cover the cohort".into());
    }
    for s in &all {
        let recs = a.provenance.get(s).map(Vec::as_slice).unwrap_or(&[]);
        let drains = recs
            .iter()
            .filter(|r| r.cause == MoveCause::OversubscribedDrain)
            .count();
        let heuristic = recs
            .iter()
            .filter(|r| {
                matches!(
                    r.cause,
                    MoveCause::OversubscribedDrain | MoveCause::GroupClosed
                )
            })
            .count();
        if drains > 1 || heuristic > 2 {
            return Err(format!(
                "{s} moved {drains} drain / {heuristic} heuristic times"
            ));
        }
        // replaying provenance must land on the current placement
        let last = recs.last().map(|r| r.to.as_ref());
        if let Some(last) = last {
            if last != a.group_of(s) {
                return Err(format!("{s} provenance ends elsewhere"));
            }
        }
    }
    Ok(())
}

pub mod fixtures;
