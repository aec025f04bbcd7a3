//! PRM-lite: a multi-query roadmap baseline. Every roadmap vertex stores its
//! shortest path back to the start, so a query is connect-only: try the `k`
//! nearest vertices and fail if none connects.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::{Lattice, State};
use crate::path::{path_cost, PlannedPath};

use super::{local_connect, steer};

/// Longest local connection attempted, in lattice steps.
const MAX_LOCAL_STEPS: usize = 100_000;

/// `k = ceil(e * (1 + 1/d) * ln n)`, at least 1.
pub fn k_nearest_rule(n: usize, dim: usize) -> usize {
    if n < 2 {
        return 1;
    }
    let k = std::f64::consts::E * (1.0 + 1.0 / dim as f64) * (n as f64).ln();
    (k.ceil() as usize).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrmBudget {
    /// Roadmap vertices, the start included.
    Vertices(usize),
    WallClock(Duration),
}

#[derive(Clone, Debug)]
pub struct PrmConfig {
    pub budget: PrmBudget,
    pub seed: u64,
    /// Probability of sampling from the goal region instead of the whole
    /// lattice. Off by default.
    pub goal_bias: Option<f64>,
}

impl PrmConfig {
    pub fn new(budget: PrmBudget, seed: u64) -> Self {
        PrmConfig {
            budget,
            seed,
            goal_bias: None,
        }
    }
}

/// Roadmap with validated edges and a shortest-path tree towards the start.
#[derive(Clone, Debug, PartialEq)]
pub struct Roadmap {
    pub vertices: Vec<State>,
    /// `(u, v, cost)`; the lattice path is `steer(u -> v)`, validated at build.
    pub edges: Vec<(u32, u32, f64)>,
    /// Connection parameter used for the last inserted vertex.
    pub k: usize,
    pub fingerprint: u64,
    /// Next vertex on the way back to the start (`u32::MAX` for the start or
    /// unreachable vertices).
    pub parent: Vec<u32>,
    /// Cost to the start, infinite when disconnected.
    pub dist: Vec<f64>,
}

impl Roadmap {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub(crate) fn compute_tree(&mut self) {
        let n = self.vertices.len();
        self.parent = vec![u32::MAX; n];
        self.dist = vec![f64::INFINITY; n];
        if n == 0 {
            return;
        }
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(u, v, c) in &self.edges {
            adj[u as usize].push((v, c));
            adj[v as usize].push((u, c));
        }
        #[derive(PartialEq)]
        struct Item(f64, u32);
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
        let mut heap = BinaryHeap::new();
        self.dist[0] = 0.0;
        heap.push(Item(0.0, 0));
        while let Some(Item(d, u)) = heap.pop() {
            if d > self.dist[u as usize] {
                continue;
            }
            for &(v, c) in &adj[u as usize] {
                let nd = d + c;
                if nd < self.dist[v as usize] {
                    self.dist[v as usize] = nd;
                    self.parent[v as usize] = u;
                    heap.push(Item(nd, v));
                }
            }
        }
    }

    /// Lattice path from the start (vertex 0) to vertex `i`.
    fn path_from_start<L: Lattice + ?Sized>(&self, domain: &L, i: usize) -> Vec<State> {
        let oriented: HashSet<(u32, u32)> = self.edges.iter().map(|&(u, v, _)| (u, v)).collect();
        let mut chain = vec![i as u32];
        while let Some(&last) = chain.last() {
            let p = self.parent[last as usize];
            if p == u32::MAX {
                break;
            }
            chain.push(p);
        }
        chain.reverse();
        let mut states = vec![self.vertices[chain[0] as usize].clone()];
        for w in chain.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (sa, sb) = (&self.vertices[a as usize], &self.vertices[b as usize]);
            if oriented.contains(&(a, b)) {
                states.extend(steer(domain, sa, sb, MAX_LOCAL_STEPS));
            } else {
                let mut seg = steer(domain, sb, sa, MAX_LOCAL_STEPS);
                seg.pop();
                seg.reverse();
                states.extend(seg);
                states.push(sb.clone());
            }
        }
        states
    }
}

fn nearest_k<L: Lattice + ?Sized>(domain: &L, vertices: &[State], q: &State, k: usize) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (domain.heuristic(v, q), i))
        .collect();
    let k = k.min(all.len());
    if k == 0 {
        return Vec::new();
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, cmp);
        all.truncate(k);
    }
    all.sort_by(cmp);
    all
}

/// Sample and connect a roadmap rooted at `start`. Vertex 0 is the start.
pub fn prm_build<L: Lattice + ?Sized>(domain: &L, start: &State, config: &PrmConfig) -> Roadmap {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (lo, hi) = domain.lattice_bounds();
    let dim = domain.dimension();
    let mut map = Roadmap {
        vertices: Vec::new(),
        edges: Vec::new(),
        k: 0,
        fingerprint: domain.fingerprint(),
        parent: Vec::new(),
        dist: Vec::new(),
    };
    let out_of_budget = |n: usize| match config.budget {
        PrmBudget::Vertices(max) => n >= max,
        PrmBudget::WallClock(t) => started.elapsed() >= t,
    };
    if out_of_budget(0) || !domain.is_valid(start) {
        map.compute_tree();
        return map;
    }
    let mut seen: HashSet<State> = HashSet::new();
    seen.insert(start.clone());
    map.vertices.push(start.clone());
    let mut misses = 0usize;
    while !out_of_budget(map.vertices.len()) {
        let q = match config.goal_bias {
            Some(p) if rng.random_bool(p) => domain.goal_region().sample(&mut rng),
            _ => State::new(lo.iter().zip(&hi).map(|(&l, &h)| rng.random_range(l..=h)).collect()),
        };
        if seen.contains(&q) || !domain.is_valid(&q) {
            misses += 1;
            // the free space is exhausted
            if misses > 100_000 {
                break;
            }
            continue;
        }
        misses = 0;
        seen.insert(q.clone());
        let n = map.vertices.len() + 1;
        let k = k_nearest_rule(n, dim);
        map.k = k;
        let new = map.vertices.len() as u32;
        for (_, j) in nearest_k(domain, &map.vertices, &q, k) {
            if let (Some(states), _) = local_connect(domain, &q, &map.vertices[j], MAX_LOCAL_STEPS) {
                map.edges.push((new, j as u32, path_cost(&states, domain)));
            }
        }
        map.vertices.push(q);
    }
    map.compute_tree();
    map
}

/// Work done by one roadmap query.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PrmQueryCost {
    pub distance_evaluations: u64,
    pub edge_checks: u64,
    pub wall_time: Duration,
}

impl PrmQueryCost {
    pub fn ops(&self) -> u64 {
        self.distance_evaluations + self.edge_checks
    }
}

/// Connect `goal` to one of its `k` nearest roadmap vertices that has a path
/// to the start. Failure to connect is a failed query.
pub fn prm_query<L: Lattice + ?Sized>(
    roadmap: &Roadmap,
    domain: &L,
    goal: &State,
) -> (Option<PlannedPath>, PrmQueryCost) {
    let started = Instant::now();
    let mut cost = PrmQueryCost::default();
    let n = roadmap.len();
    let k = k_nearest_rule(n, domain.dimension());
    cost.distance_evaluations = n as u64;
    let mut result = None;
    for (_, i) in nearest_k(domain, &roadmap.vertices, goal, k) {
        if !roadmap.dist[i].is_finite() {
            continue;
        }
        let (local, checks) = local_connect(domain, &roadmap.vertices[i], goal, MAX_LOCAL_STEPS);
        cost.edge_checks += checks as u64;
        if let Some(local) = local {
            let mut states = roadmap.path_from_start(domain, i);
            states.extend(local.into_iter().skip(1));
            result = Some(PlannedPath::from_states(states, domain));
            break;
        }
    }
    cost.wall_time = started.elapsed();
    (result, cost)
}
