//! Online phase: find a covering subregion, walk greedily from the goal to
//! its attractor and prepend the stored library path. Nothing here calls a
//! validity function.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::QueryError;
use crate::lattice::{greedy_predecessor_counted, Lattice, State};
use crate::path::PlannedPath;
use crate::preprocess::PreprocessArtifact;

/// Work done by one query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct QueryStats {
    pub subregion_scans: u64,
    pub greedy_expansions: u64,
    pub predecessor_evaluations: u64,
    /// Validity evaluations observed on the domain while the query ran.
    pub collision_checks: u64,
    #[serde(serialize_with = "secs")]
    pub wall_time: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl QueryStats {
    /// Scans plus predecessor evaluations, the quantity bounded by
    /// `|R| + D * b`.
    pub fn ops(&self) -> u64 {
        self.subregion_scans + self.predecessor_evaluations
    }

    /// `key=value` pairs on one line.
    pub fn to_record(&self) -> String {
        format!(
            "subregion_scans={} greedy_expansions={} predecessor_evaluations={} collision_checks={} wall_time_s={:.9}",
            self.subregion_scans,
            self.greedy_expansions,
            self.predecessor_evaluations,
            self.collision_checks,
            self.wall_time.as_secs_f64()
        )
    }
}

/// First subregion (in stored order) whose ball contains `goal`, and the
/// number of subregions examined.
pub fn find_covering_subregion<L: Lattice + ?Sized>(
    goal: &State,
    artifact: &PreprocessArtifact,
    domain: &L,
) -> Result<(usize, u64), QueryError> {
    if goal.dim() != domain.dimension() {
        return Err(QueryError::Lattice(crate::error::LatticeError::DimensionMismatch {
            expected: domain.dimension(),
            got: goal.dim(),
        }));
    }
    if !domain.goal_region().contains(goal) {
        return Err(QueryError::NotCovered(goal.clone()));
    }
    let mut scans = 0;
    for (i, r) in artifact.subregions.iter().enumerate() {
        scans += 1;
        if r.covers(domain, goal) {
            return Ok((i, scans));
        }
    }
    Err(QueryError::NotCovered(goal.clone()))
}

/// Greedy walk result with its work counters.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyWalk {
    /// Attractor first, goal last.
    pub path: PlannedPath,
    pub expansions: u64,
    pub predecessor_evaluations: u64,
}

/// Follow greedy predecessors from `goal` to `attractor` and reverse. More
/// than `depth + 1` steps is a hard fault.
pub fn find_greedy_path<L: Lattice + ?Sized>(
    attractor: &State,
    goal: &State,
    depth: u32,
    domain: &L,
) -> Result<GreedyWalk, QueryError> {
    let budget = depth as usize + 1;
    let mut states = vec![goal.clone()];
    let mut evaluations = 0u64;
    let mut cur = goal.clone();
    while &cur != attractor {
        if states.len() > budget {
            return Err(QueryError::StepBudgetExceeded {
                attractor: attractor.clone(),
                budget,
            });
        }
        let (p, n) = greedy_predecessor_counted(domain, &cur, attractor)
            .ok_or_else(|| crate::error::LatticeError::EmptyPredecessors(cur.clone()))?;
        evaluations += n as u64;
        states.push(p.clone());
        cur = p;
    }
    let expansions = states.len() as u64 - 1;
    states.reverse();
    Ok(GreedyWalk {
        path: PlannedPath::from_states(states, domain),
        expansions,
        predecessor_evaluations: evaluations,
    })
}

/// Answer a goal query: library path to the covering attractor followed by
/// the greedy walk, the shared attractor kept once.
pub fn compute_path<L: Lattice + ?Sized>(
    goal: &State,
    artifact: &PreprocessArtifact,
    domain: &L,
) -> Result<(PlannedPath, QueryStats), QueryError> {
    let fingerprint = domain.fingerprint();
    if artifact.domain_fingerprint != fingerprint {
        return Err(QueryError::FingerprintMismatch {
            artifact: artifact.domain_fingerprint,
            domain: fingerprint,
        });
    }
    let checks_before = domain.validity_checks();
    let started = Instant::now();
    let (index, scans) = find_covering_subregion(goal, artifact, domain)?;
    let region = &artifact.subregions[index];
    let walk = find_greedy_path(&region.attractor, goal, region.depth, domain)?;
    let library = artifact
        .library
        .paths
        .get(region.path_index as usize)
        .ok_or(QueryError::MissingPath(region.path_index as usize))?;
    let mut states = Vec::with_capacity(library.len() + walk.path.len() - 1);
    states.extend_from_slice(&library.states);
    states.extend_from_slice(&walk.path.states[1..]);
    let path = PlannedPath {
        states,
        cost: library.cost + walk.path.cost,
    };
    let wall_time = started.elapsed();
    let stats = QueryStats {
        subregion_scans: scans,
        greedy_expansions: walk.expansions,
        predecessor_evaluations: walk.predecessor_evaluations,
        collision_checks: domain.validity_checks() - checks_before,
        wall_time,
    };
    Ok((path, stats))
}

/// Empirical worst case over every valid goal state.
#[derive(Clone, Debug, PartialEq)]
pub struct WorstCase {
    pub queries: u64,
    pub max_wall_time: Duration,
    pub max_ops: u64,
    pub argmax_goal: Option<State>,
    /// `|R| + D_max * b`.
    pub ops_bound: u64,
    pub max_collision_checks: u64,
    /// Goals that broke a per-query work bound: more scans than subregions,
    /// more expansions than the chosen depth, or more predecessor
    /// evaluations than `expansions * b`.
    pub violations: Vec<State>,
}

impl WorstCase {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.max_ops <= self.ops_bound && self.max_collision_checks == 0
    }
}

/// Run [`compute_path`] for every valid state of the goal region. Validity is
/// tested only to pick the goals, outside the timed queries.
pub fn profile_worst_case<L: Lattice + ?Sized>(
    artifact: &PreprocessArtifact,
    domain: &L,
    enumeration_budget: u64,
) -> Result<WorstCase, QueryError> {
    let b = domain.branching_factor() as u64;
    let mut worst = WorstCase {
        queries: 0,
        max_wall_time: Duration::ZERO,
        max_ops: 0,
        argmax_goal: None,
        ops_bound: artifact.subregions.len() as u64 + artifact.max_depth() as u64 * b,
        max_collision_checks: 0,
        violations: Vec::new(),
    };
    for goal in domain.goal_region().states(enumeration_budget)? {
        if !domain.is_valid(&goal) {
            continue;
        }
        let (_, stats) = compute_path(&goal, artifact, domain)?;
        worst.queries += 1;
        let (index, _) = find_covering_subregion(&goal, artifact, domain)?;
        let depth = artifact.subregions[index].depth as u64;
        if stats.subregion_scans > artifact.subregions.len() as u64
            || stats.greedy_expansions > depth
            || stats.predecessor_evaluations > stats.greedy_expansions * b
        {
            worst.violations.push(goal.clone());
        }
        worst.max_wall_time = worst.max_wall_time.max(stats.wall_time);
        worst.max_collision_checks = worst.max_collision_checks.max(stats.collision_checks);
        if worst.argmax_goal.is_none() || stats.ops() > worst.max_ops {
            worst.max_ops = stats.ops();
            worst.argmax_goal = Some(goal);
        }
    }
    Ok(worst)
}
