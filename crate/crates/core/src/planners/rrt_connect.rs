use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::PlanError;
use crate::lattice::{Lattice, State};
use crate::path::PlannedPath;

use super::{steer_step, OfflinePlanner};

enum Extend {
    Reached(usize),
    Advanced(usize),
    Trapped,
}

struct Tree {
    states: Vec<State>,
    parent: Vec<Option<usize>>,
    index: HashMap<State, usize>,
}

impl Tree {
    fn new(root: State) -> Self {
        let mut index = HashMap::new();
        index.insert(root.clone(), 0);
        Tree {
            states: vec![root],
            parent: vec![None],
            index,
        }
    }

    fn nearest<L: Lattice + ?Sized>(&self, domain: &L, q: &State) -> usize {
        let mut best = 0;
        let mut best_h = f64::INFINITY;
        for (i, s) in self.states.iter().enumerate() {
            let h = domain.heuristic(s, q);
            if h < best_h {
                best_h = h;
                best = i;
            }
        }
        best
    }

    fn add(&mut self, s: State, parent: usize) -> usize {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        let i = self.states.len();
        self.index.insert(s.clone(), i);
        self.states.push(s);
        self.parent.push(Some(parent));
        i
    }

    fn extend<L: Lattice + ?Sized>(&mut self, domain: &L, target: &State, steps: usize) -> Extend {
        let mut cur = self.nearest(domain, target);
        let mut moved = false;
        for _ in 0..steps {
            if &self.states[cur] == target {
                return Extend::Reached(cur);
            }
            let Some(next) = steer_step(domain, &self.states[cur], target) else {
                break;
            };
            if !domain.is_edge_valid(&self.states[cur], &next) {
                break;
            }
            cur = self.add(next, cur);
            moved = true;
        }
        if &self.states[cur] == target {
            Extend::Reached(cur)
        } else if moved {
            Extend::Advanced(cur)
        } else {
            Extend::Trapped
        }
    }

    fn connect<L: Lattice + ?Sized>(&mut self, domain: &L, target: &State, steps: usize) -> Extend {
        loop {
            match self.extend(domain, target, steps) {
                Extend::Advanced(_) => continue,
                other => return other,
            }
        }
    }

    fn branch(&self, mut i: usize) -> Vec<State> {
        let mut out = vec![self.states[i].clone()];
        while let Some(p) = self.parent[i] {
            out.push(self.states[p].clone());
            i = p;
        }
        out
    }
}

/// Bidirectional RRT on the lattice. Trees grow by greedy lattice steering so
/// every stored edge is a primitive step that has been validated. The first
/// iteration tries a direct connection from start to goal.
pub fn rrt_connect_plan<L: Lattice + ?Sized>(
    start: &State,
    goal: &State,
    domain: &L,
    timeout: Duration,
    seed: u64,
) -> Result<PlannedPath, PlanError> {
    RrtConnect::with_seed(seed).solve(domain, start, goal, timeout)
}

#[derive(Clone, Debug)]
pub struct RrtConnect {
    pub seed: u64,
    /// Lattice steps per extend.
    pub extend_steps: usize,
    /// Hard cap on sampling iterations, independent of the clock.
    pub max_iterations: usize,
}

impl Default for RrtConnect {
    fn default() -> Self {
        RrtConnect {
            seed: 0,
            extend_steps: 4,
            max_iterations: 1_000_000,
        }
    }
}

impl RrtConnect {
    pub fn with_seed(seed: u64) -> Self {
        RrtConnect {
            seed,
            ..Default::default()
        }
    }

    pub fn solve<L: Lattice + ?Sized>(
        &self,
        domain: &L,
        start: &State,
        goal: &State,
        timeout: Duration,
    ) -> Result<PlannedPath, PlanError> {
        if timeout.is_zero() {
            return Err(PlanError::Timeout);
        }
        let started = Instant::now();
        if !domain.is_valid(start) {
            return Err(PlanError::InvalidEndpoint(start.clone()));
        }
        if !domain.is_valid(goal) {
            return Err(PlanError::InvalidEndpoint(goal.clone()));
        }
        if start == goal {
            return Ok(PlannedPath::single(start.clone()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lo, hi) = domain.lattice_bounds();
        let mut a = Tree::new(start.clone());
        let mut b = Tree::new(goal.clone());
        let mut a_is_start = true;

        if let Extend::Reached(i) = a.connect(domain, goal, self.extend_steps) {
            let mut states = a.branch(i);
            states.reverse();
            return Ok(PlannedPath::from_states(states, domain));
        }

        for _ in 0..self.max_iterations {
            if started.elapsed() >= timeout {
                return Err(PlanError::Timeout);
            }
            let q = State::new(
                lo.iter()
                    .zip(&hi)
                    .map(|(&l, &h)| rng.random_range(l..=h))
                    .collect(),
            );
            let new = match a.extend(domain, &q, self.extend_steps) {
                Extend::Reached(i) | Extend::Advanced(i) => Some(i),
                Extend::Trapped => None,
            };
            if let Some(i) = new {
                let joint = a.states[i].clone();
                if let Extend::Reached(j) = b.connect(domain, &joint, self.extend_steps) {
                    // a: root .. joint, b: joint .. root
                    let mut states = a.branch(i);
                    states.reverse();
                    states.extend(b.branch(j).into_iter().skip(1));
                    if !a_is_start {
                        states.reverse();
                    }
                    return Ok(PlannedPath::from_states(states, domain));
                }
            }
            std::mem::swap(&mut a, &mut b);
            a_is_start = !a_is_start;
        }
        Err(PlanError::Timeout)
    }
}

impl OfflinePlanner for RrtConnect {
    fn name(&self) -> &str {
        "rrt-connect"
    }

    fn plan(
        &self,
        domain: &dyn Lattice,
        start: &State,
        goal: &State,
        timeout: Duration,
    ) -> Result<PlannedPath, PlanError> {
        self.solve(domain, start, goal, timeout)
    }
}
