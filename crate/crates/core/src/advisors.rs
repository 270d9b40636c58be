//! One faculty advisor per finalized group, under per-advisor load limits.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::allocator::Allocation;
use crate::ballots::jaccard;
use crate::error::{Error, Result};
use crate::intake::Proposal;
use crate::model::{AdvisorId, InterestArea, ProposalId};

fn default_max_load() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Advisor {
    pub id: AdvisorId,
    pub name: String,
    #[serde(default = "default_max_load")]
    pub max_load: usize,
    #[serde(default)]
    pub area_prefs: BTreeSet<InterestArea>,
}

pub type AdvisorMap = BTreeMap<ProposalId, AdvisorId>;

pub fn validate_advisor(a: &Advisor) -> Result<()> {
    if a.max_load < 1 {
        return Err(Error::Invalid(format!("advisor {} has max_load 0", a.id)));
    }
    Ok(())
}

/// Greedy assignment: groups in proposal id order, each to the least-loaded
/// advisor with spare capacity, preferring higher area overlap, then lower id.
pub fn assign_advisors(
    allocation: &Allocation,
    proposals: &BTreeMap<ProposalId, Proposal>,
    advisors: &[Advisor],
) -> Result<AdvisorMap> {
    if !allocation.finalized {
        return Err(Error::Invalid(
            "advisors are assigned to finalized groups only".into(),
        ));
    }
    for a in advisors {
        validate_advisor(a)?;
    }
    let groups: Vec<&ProposalId> = allocation.groups.keys().collect();
    let capacity: usize = advisors.iter().map(|a| a.max_load).sum();
    if capacity < groups.len() {
        return Err(Error::AdvisorCapacity {
            capacity,
            groups: groups.len(),
            shortfall: groups.len() - capacity,
        });
    }
    let mut sorted: Vec<&Advisor> = advisors.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut load: Vec<usize> = vec![0; sorted.len()];
    let empty = BTreeSet::new();
    let mut out = AdvisorMap::new();
    for pid in groups {
        let areas = proposals.get(pid).map_or(&empty, |p| &p.form.areas);
        let pick = sorted
            .iter()
            .enumerate()
            .filter(|(i, a)| load[*i] < a.max_load)
            .min_by(|(i, a), (j, b)| {
                load[*i]
                    .cmp(&load[*j])
                    .then_with(|| {
                        jaccard(&b.area_prefs, areas).total_cmp(&jaccard(&a.area_prefs, areas))
                    })
                    .then_with(|| a.id.cmp(&b.id))
            })
            .map(|(i, _)| i)
            .expect("capacity checked above");
        load[pick] += 1;
        out.insert(pid.clone(), sorted[pick].id.clone());
    }
    Ok(out)
}

pub fn reassign_advisor(
    map: &AdvisorMap,
    advisors: &[Advisor],
    group: &ProposalId,
    advisor: &AdvisorId,
) -> Result<AdvisorMap> {
    let current = map.get(group).ok_or_else(|| Error::Unknown {
        kind: "group",
        id: group.to_string(),
    })?;
    let target = advisors
        .iter()
        .find(|a| &a.id == advisor)
        .ok_or_else(|| Error::Unknown {
            kind: "advisor",
            id: advisor.to_string(),
        })?;
    if current == advisor {
        return Ok(map.clone());
    }
    let load = map.values().filter(|a| *a == advisor).count();
    if load + 1 > target.max_load {
        return Err(Error::AdvisorOverloaded {
            advisor: advisor.to_string(),
            max_load: target.max_load,
        });
    }
    let mut out = map.clone();
    out.insert(group.clone(), advisor.clone());
    Ok(out)
}
