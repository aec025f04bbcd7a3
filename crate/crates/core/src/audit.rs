//! Offline audit of a finished artifact against its domain. Unlike queries,
//! the audit performs collision checks freely.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::LatticeError;
use crate::lattice::{greedy_predecessor, Lattice, State};
use crate::preprocess::{compute_reachability, PreprocessArtifact};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ArtifactAudit {
    pub goal_states: u64,
    pub subregions: u64,
    /// Valid goal states outside every subregion.
    pub uncovered: Vec<State>,
    /// Subregions whose valid ball differs from a fresh reachability run.
    pub reachability_mismatches: Vec<usize>,
    /// Covered goals whose greedy walk leaves the valid edges or runs
    /// longer than the stored depth.
    pub walk_failures: Vec<State>,
}

impl ArtifactAudit {
    pub fn holds(&self) -> bool {
        self.uncovered.is_empty() && self.reachability_mismatches.is_empty() && self.walk_failures.is_empty()
    }
}

fn walk_is_valid<L: Lattice + ?Sized>(domain: &L, goal: &State, attractor: &State, depth: u32) -> bool {
    let mut cur = goal.clone();
    let mut steps = 0;
    while &cur != attractor {
        if steps >= depth {
            return false;
        }
        let Ok(p) = greedy_predecessor(domain, &cur, attractor) else {
            return false;
        };
        if !domain.is_edge_valid(&p, &cur) {
            return false;
        }
        cur = p;
        steps += 1;
    }
    true
}

/// Check coverage, reachable-set exactness and walk validity by enumerating
/// the goal region (at most `enumeration_budget` states).
pub fn audit_artifact<L: Lattice + ?Sized>(
    artifact: &PreprocessArtifact,
    domain: &L,
    enumeration_budget: u64,
) -> Result<ArtifactAudit, LatticeError> {
    let valid: Vec<State> = domain
        .goal_region()
        .states(enumeration_budget)?
        .into_iter()
        .filter(|s| domain.is_valid(s))
        .collect();
    let mut audit = ArtifactAudit {
        goal_states: valid.len() as u64,
        subregions: artifact.subregions.len() as u64,
        ..Default::default()
    };
    for goal in &valid {
        match artifact.covering_index(domain, goal) {
            None => audit.uncovered.push(goal.clone()),
            Some(i) => {
                let r = &artifact.subregions[i];
                if !walk_is_valid(domain, goal, &r.attractor, r.depth) {
                    audit.walk_failures.push(goal.clone());
                }
            }
        }
    }
    for (i, r) in artifact.subregions.iter().enumerate() {
        let Ok(rerun) = compute_reachability(&r.attractor, domain, artifact.stats.epsilon, None) else {
            audit.reachability_mismatches.push(i);
            continue;
        };
        let ball: HashSet<&State> = valid
            .iter()
            .filter(|s| domain.heuristic(s, &r.attractor) < r.radius)
            .collect();
        let same = rerun.radius.to_bits() == r.radius.to_bits()
            && ball.len() == rerun.reachable.len()
            && rerun.reachable.keys().all(|s| ball.contains(s));
        if !same {
            audit.reachability_mismatches.push(i);
        }
    }
    Ok(audit)
}
