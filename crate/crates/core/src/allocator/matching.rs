use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::intake::SeatProfile;
use crate::model::{Program, Student, StudentId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatFeasibility {
    pub feasible: bool,
    /// Members left without a seat by a maximum matching.
    pub unmatched: usize,
    /// Student to 1-based seat number.
    pub assignment: BTreeMap<StudentId, usize>,
}

/// Bitmask of seats whose allowed set contains `program`.
pub(crate) fn eligibility_mask(program: &Program, profile: &SeatProfile) -> u64 {
    profile
        .seats
        .iter()
        .enumerate()
        .filter(|(_, allowed)| allowed.contains(program))
        .fold(0, |m, (i, _)| m | (1 << i))
}

/// Size of a maximum matching; `adj[i]` is the seat mask of member `i`.
pub(crate) fn max_matching(adj: &[u64]) -> usize {
    let mut seat_owner: [Option<usize>; 64] = [None; 64];
    let mut size = 0;
    for i in 0..adj.len() {
        let mut visited = 0u64;
        if augment(i, adj, &mut seat_owner, &mut visited) {
            size += 1;
        }
    }
    size
}

fn augment(i: usize, adj: &[u64], owner: &mut [Option<usize>; 64], visited: &mut u64) -> bool {
    let mut free = adj[i] & !*visited;
    while free != 0 {
        let seat = free.trailing_zeros() as usize;
        free &= free - 1;
        *visited |= 1 << seat;
        match owner[seat] {
            None => {
                owner[seat] = Some(i);
                return true;
            }
            Some(j) => {
                if augment(j, adj, owner, visited) {
                    owner[seat] = Some(i);
                    return true;
                }
            }
        }
    }
    false
}

/// Maximum matching that is lexicographically smallest in member order:
/// each member in turn takes the lowest seat that still allows a maximum
/// matching of everyone after it.
pub(crate) fn canonical_matching(adj: &[u64]) -> Vec<Option<usize>> {
    let target = max_matching(adj);
    let mut taken = 0u64;
    let mut placed = 0;
    let mut out = Vec::with_capacity(adj.len());
    for i in 0..adj.len() {
        let mut chosen = None;
        let mut options = adj[i] & !taken;
        while options != 0 {
            let seat = options.trailing_zeros() as usize;
            options &= options - 1;
            let rest: Vec<u64> = adj[i + 1..]
                .iter()
                .map(|m| m & !(taken | 1 << seat))
                .collect();
            if placed + 1 + max_matching(&rest) == target {
                chosen = Some(seat);
                break;
            }
        }
        if let Some(seat) = chosen {
            taken |= 1 << seat;
            placed += 1;
        }
        out.push(chosen);
    }
    out
}

/// Matches group members to the vacancies of a seat profile. A member is
/// eligible for a seat when the seat allows the member's program. Ties between
/// maximum matchings are broken by student id, then seat index.
pub fn seat_feasibility(members: &[&Student], profile: &SeatProfile) -> SeatFeasibility {
    let mut sorted: Vec<&Student> = members.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let adj: Vec<u64> = sorted
        .iter()
        .map(|s| eligibility_mask(&s.program, profile))
        .collect();
    let matching = canonical_matching(&adj);
    let assignment: BTreeMap<StudentId, usize> = sorted
        .iter()
        .zip(&matching)
        .filter_map(|(s, seat)| seat.map(|k| (s.id.clone(), k + 1)))
        .collect();
    let unmatched = sorted.len() - assignment.len();
    SeatFeasibility {
        feasible: unmatched == 0 && sorted.len() <= profile.seats.len(),
        unmatched,
        assignment,
    }
}
