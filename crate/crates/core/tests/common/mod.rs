//! Independent oracles. Nothing here calls the search code under test.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::time::Duration;

use goalcover::error::PlanError;
use goalcover::path::PlannedPath;
use goalcover::preprocess::{PreprocessArtifact, Subregion};
use goalcover::{GoalRegion, GridWorld, Lattice, OfflinePlanner, State};

/// Brute-force argmin of `h(p, target)` over all predecessors, ties to the
/// lexicographically smallest, written without the library helpers.
pub fn argmin_pred<L: Lattice + ?Sized>(domain: &L, s: &State, target: &State) -> Option<State> {
    let mut cands: Vec<(f64, State)> = domain
        .primitives()
        .iter()
        .map(|p| State::new(s.coords().iter().zip(p).map(|(c, d)| c - d).collect()))
        .filter(|n| domain.contains(n))
        .map(|n| (domain.heuristic(&n, target), n))
        .collect();
    let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    cands.retain(|c| c.0 - best <= 1e-12);
    cands.sort_by(|a, b| a.1.cmp(&b.1));
    cands.into_iter().next().map(|c| c.1)
}

/// Walk greedy predecessors from `s` to `attractor` checking every edge.
/// Returns the step count when the walk arrives through valid edges.
pub fn greedy_walk_valid<L: Lattice + ?Sized>(domain: &L, s: &State, attractor: &State) -> Option<u32> {
    if !domain.is_valid(s) {
        return None;
    }
    let mut cur = s.clone();
    let mut steps = 0;
    let limit = 10_000;
    while &cur != attractor {
        let p = argmin_pred(domain, &cur, attractor)?;
        if !domain.is_edge_valid(&cur, &p) {
            return None;
        }
        cur = p;
        steps += 1;
        if steps > limit {
            return None;
        }
    }
    Some(steps)
}

/// Reachability recomputed by simulating the greedy walk from every goal
/// state: state -> walk length.
pub fn reachable_by_simulation<L: Lattice + ?Sized>(domain: &L, attractor: &State) -> HashMap<State, u32> {
    domain
        .goal_region()
        .states(u64::MAX)
        .unwrap()
        .into_iter()
        .filter_map(|s| greedy_walk_valid(domain, &s, attractor).map(|d| (s, d)))
        .collect()
}

pub fn valid_goal_states<L: Lattice + ?Sized>(domain: &L) -> Vec<State> {
    domain
        .goal_region()
        .states(u64::MAX)
        .unwrap()
        .into_iter()
        .filter(|s| domain.is_valid(s))
        .collect()
}

/// Valid goal states no subregion covers.
pub fn uncovered<L: Lattice + ?Sized>(domain: &L, subregions: &[Subregion]) -> Vec<State> {
    valid_goal_states(domain)
        .into_iter()
        .filter(|s| !subregions.iter().any(|r| domain.heuristic(s, &r.attractor) < r.radius))
        .collect()
}

/// All goal states (valid or not) inside at least one subregion.
pub fn covered_union<L: Lattice + ?Sized>(domain: &L, subregions: &[Subregion]) -> HashSet<State> {
    domain
        .goal_region()
        .states(u64::MAX)
        .unwrap()
        .into_iter()
        .filter(|s| subregions.iter().any(|r| domain.heuristic(s, &r.attractor) < r.radius))
        .collect()
}

#[derive(PartialEq)]
struct Item(f64, State);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Single-source Dijkstra over valid edges; edge cost is `h` between
/// neighbours.
pub fn dijkstra<L: Lattice + ?Sized>(domain: &L, source: &State) -> HashMap<State, f64> {
    let mut dist = HashMap::new();
    if !domain.is_valid(source) {
        return dist;
    }
    let mut heap = BinaryHeap::new();
    dist.insert(source.clone(), 0.0);
    heap.push(Item(0.0, source.clone()));
    while let Some(Item(d, s)) = heap.pop() {
        if d > dist[&s] {
            continue;
        }
        for n in domain.succs(&s) {
            let nd = d + domain.heuristic(&s, &n);
            if dist.get(&n).is_none_or(|&old| nd < old) && domain.is_edge_valid(&s, &n) {
                dist.insert(n.clone(), nd);
                heap.push(Item(nd, n));
            }
        }
    }
    dist
}

/// Check a path state by state and edge by edge.
pub fn path_is_valid<L: Lattice + ?Sized>(domain: &L, path: &PlannedPath, start: &State, goal: &State) -> bool {
    path.first() == Some(start)
        && path.last() == Some(goal)
        && path.states.iter().all(|s| domain.is_valid(s))
        && path
            .states
            .windows(2)
            .all(|w| domain.are_neighbors(&w[0], &w[1]) && domain.is_edge_valid(&w[0], &w[1]))
}

/// Planner that always answers with the two-state "path" `[start, goal]`.
/// Lets coverage be exercised on maps where no real path exists.
pub struct Teleport;

impl OfflinePlanner for Teleport {
    fn name(&self) -> &str {
        "teleport"
    }

    fn plan(
        &self,
        domain: &dyn Lattice,
        start: &State,
        goal: &State,
        _timeout: Duration,
    ) -> Result<PlannedPath, PlanError> {
        Ok(PlannedPath::from_states(vec![start.clone(), goal.clone()], domain))
    }
}

/// Planner that fails for a fixed set of goals and otherwise teleports.
pub struct FailOn(pub HashSet<State>);

impl OfflinePlanner for FailOn {
    fn name(&self) -> &str {
        "fail-on"
    }

    fn plan(
        &self,
        domain: &dyn Lattice,
        start: &State,
        goal: &State,
        timeout: Duration,
    ) -> Result<PlannedPath, PlanError> {
        if self.0.contains(goal) {
            Err(PlanError::Timeout)
        } else {
            Teleport.plan(domain, start, goal, timeout)
        }
    }
}

/// Exhaustive coverage audit of an artifact.
pub fn assert_covers<L: Lattice + ?Sized>(domain: &L, artifact: &PreprocessArtifact) {
    let holes = uncovered(domain, &artifact.subregions);
    assert!(holes.is_empty(), "{} uncovered valid states, first {:?}", holes.len(), holes.first());
}

/// A grid whose heuristic has a shortcut between two non-adjacent states.
pub struct Warped {
    pub grid: GridWorld,
    pub a: State,
    pub b: State,
}

impl Lattice for Warped {
    fn dimension(&self) -> usize {
        self.grid.dimension()
    }
    fn primitives(&self) -> &[Vec<i32>] {
        self.grid.primitives()
    }
    fn goal_region(&self) -> &GoalRegion {
        self.grid.goal_region()
    }
    fn contains(&self, s: &State) -> bool {
        self.grid.contains(s)
    }
    fn lattice_bounds(&self) -> (Vec<i32>, Vec<i32>) {
        self.grid.lattice_bounds()
    }
    fn heuristic(&self, x: &State, y: &State) -> f64 {
        if x == y {
            0.0
        } else if (x == &self.a && y == &self.b) || (x == &self.b && y == &self.a) {
            0.5
        } else {
            1.0
        }
    }
    fn is_valid(&self, s: &State) -> bool {
        self.grid.is_valid(s)
    }
    fn is_edge_valid(&self, x: &State, y: &State) -> bool {
        self.grid.is_edge_valid(x, y)
    }
    fn fingerprint(&self) -> u64 {
        0
    }
    fn validity_checks(&self) -> u64 {
        0
    }
}
