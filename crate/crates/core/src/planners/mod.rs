//! Offline planners: the planner used to build the path library, and the
//! baselines the benchmark harness compares against.

mod astar;
mod prm;
mod rrt_connect;

use std::time::Duration;

use crate::error::PlanError;
use crate::lattice::{prefer, Lattice, State};
use crate::path::PlannedPath;

pub use astar::{astar_plan, AStar};
pub use prm::{k_nearest_rule, prm_build, prm_query, PrmBudget, PrmConfig, PrmQueryCost, Roadmap};
pub use rrt_connect::{rrt_connect_plan, RrtConnect};

/// A conventional planner that connects the fixed start to an attractor.
///
/// Given identical `(domain, start, goal)` and configuration, the output must
/// be identical unless the timeout cuts the search short.
pub trait OfflinePlanner: Send + Sync {
    fn name(&self) -> &str;

    fn plan(
        &self,
        domain: &dyn Lattice,
        start: &State,
        goal: &State,
        timeout: Duration,
    ) -> Result<PlannedPath, PlanError>;
}

/// The successor of `from` closest to `to` under `h`, with the usual
/// tie-break. `None` when no successor is strictly closer than `from`.
pub(crate) fn steer_step<L: Lattice + ?Sized>(domain: &L, from: &State, to: &State) -> Option<State> {
    let h_here = domain.heuristic(from, to);
    let mut best: Option<(f64, State)> = None;
    for p in domain.primitives() {
        let cand = from.offset(p);
        if !domain.contains(&cand) {
            continue;
        }
        let h = domain.heuristic(&cand, to);
        match &best {
            Some((bh, bs)) if !prefer(h, &cand, *bh, bs) => {}
            _ => best = Some((h, cand)),
        }
    }
    best.filter(|(h, _)| *h < h_here).map(|(_, s)| s)
}

/// Greedy lattice steering from `from` towards `to`, at most `max_steps`
/// steps. Returns the visited states excluding `from`; collision-unaware.
pub(crate) fn steer<L: Lattice + ?Sized>(domain: &L, from: &State, to: &State, max_steps: usize) -> Vec<State> {
    let mut out = Vec::new();
    let mut cur = from.clone();
    while out.len() < max_steps && &cur != to {
        match steer_step(domain, &cur, to) {
            Some(next) => {
                out.push(next.clone());
                cur = next;
            }
            None => break,
        }
    }
    out
}

/// Collision-checked straight-ish local connection. Returns the full state
/// sequence `from ..= to` when every edge is valid, and the number of edge
/// checks spent either way.
pub(crate) fn local_connect<L: Lattice + ?Sized>(
    domain: &L,
    from: &State,
    to: &State,
    max_steps: usize,
) -> (Option<Vec<State>>, usize) {
    let mut states = vec![from.clone()];
    let mut checks = 0;
    for next in steer(domain, from, to, max_steps) {
        checks += 1;
        if !domain.is_edge_valid(states.last().expect("non-empty"), &next) {
            return (None, checks);
        }
        states.push(next);
    }
    if states.last() == Some(to) {
        (Some(states), checks)
    } else {
        (None, checks)
    }
}
