use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use crate::error::PlanError;
use crate::lattice::{Lattice, State};
use crate::path::PlannedPath;

use super::OfflinePlanner;

#[derive(PartialEq)]
struct Node {
    f: f64,
    g: f64,
    state: State,
}

impl Eq for Node {}

impl Ord for Node {
    // min-heap on f, then larger g (deeper first), then lexicographic state
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.state.cmp(&self.state))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Optimal A* over the whole lattice. Edge cost is `h` between neighbours, so
/// `h` itself is a consistent heuristic.
pub fn astar_plan<L: Lattice + ?Sized>(
    start: &State,
    goal: &State,
    domain: &L,
    timeout: Duration,
) -> Result<PlannedPath, PlanError> {
    if !domain.is_valid(start) {
        return Err(PlanError::InvalidEndpoint(start.clone()));
    }
    if !domain.is_valid(goal) {
        return Err(PlanError::InvalidEndpoint(goal.clone()));
    }
    if start == goal {
        return Ok(PlannedPath::single(start.clone()));
    }
    let started = Instant::now();
    let mut g_score: HashMap<State, f64> = HashMap::new();
    let mut parent: HashMap<State, State> = HashMap::new();
    let mut closed: HashMap<State, ()> = HashMap::new();
    let mut open = BinaryHeap::new();
    g_score.insert(start.clone(), 0.0);
    open.push(Node {
        f: domain.heuristic(start, goal),
        g: 0.0,
        state: start.clone(),
    });
    let mut expansions = 0u64;
    while let Some(Node { g, state, .. }) = open.pop() {
        if closed.contains_key(&state) {
            continue;
        }
        if &state == goal {
            let mut states = vec![state];
            while let Some(p) = parent.get(states.last().expect("non-empty")) {
                states.push(p.clone());
            }
            states.reverse();
            return Ok(PlannedPath::from_states(states, domain));
        }
        expansions += 1;
        if expansions.is_multiple_of(256) && started.elapsed() >= timeout {
            return Err(PlanError::Timeout);
        }
        for next in domain.succs(&state) {
            if closed.contains_key(&next) {
                continue;
            }
            let ng = g + domain.heuristic(&state, &next);
            if g_score.get(&next).is_some_and(|&old| old <= ng) {
                continue;
            }
            if !domain.is_edge_valid(&state, &next) {
                continue;
            }
            g_score.insert(next.clone(), ng);
            parent.insert(next.clone(), state.clone());
            open.push(Node {
                f: ng + domain.heuristic(&next, goal),
                g: ng,
                state: next,
            });
        }
        closed.insert(state, ());
    }
    Err(PlanError::Disconnected)
}

/// [`astar_plan`] as an [`OfflinePlanner`].
#[derive(Clone, Copy, Debug, Default)]
pub struct AStar;

impl OfflinePlanner for AStar {
    fn name(&self) -> &str {
        "astar"
    }

    fn plan(
        &self,
        domain: &dyn Lattice,
        start: &State,
        goal: &State,
        timeout: Duration,
    ) -> Result<PlannedPath, PlanError> {
        astar_plan(start, goal, domain, timeout)
    }
}
