//! Seeded fixture worlds shared by tests, benchmarks and the CLI.
//!
//! Every constructor stores a start state in the returned domain. Random
//! scenes are post-processed so that every valid goal state is connected to
//! the start; otherwise the offline planner could not finish.

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domains::{ArmConfig, Circle, GridConfig, GridWorld, PlanarArm};
use crate::lattice::{Connectivity, GoalBox, GoalRegion, Lattice, State};

/// States reachable from `start` through valid edges, over the whole lattice.
pub fn connected_component<L: Lattice + ?Sized>(domain: &L, start: &State) -> HashSet<State> {
    let mut seen = HashSet::new();
    if !domain.is_valid(start) {
        return seen;
    }
    seen.insert(start.clone());
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(s) = queue.pop_front() {
        for n in domain.succs(&s) {
            if !seen.contains(&n) && domain.is_edge_valid(&s, &n) {
                seen.insert(n.clone());
                queue.push_back(n);
            }
        }
    }
    seen
}

fn grid(dims: Vec<i32>, conn: Connectivity, goal: GoalRegion, blocked: Vec<State>, start: State) -> GridWorld {
    let mut config = GridConfig::new(dims, conn, goal);
    config.start = Some(start);
    GridWorld::new(config, blocked).expect("fixture is well formed")
}

fn st(x: i32, y: i32) -> State {
    State::new(vec![x, y])
}

/// Fill every free cell that is not connected to the start.
fn connected_only(raw: GridWorld) -> GridWorld {
    let start = raw.start().expect("fixture has a start").clone();
    let reach = connected_component(&raw, &start);
    let (lo, hi) = raw.lattice_bounds();
    let mut filled = raw.occupied_cells();
    for y in lo[1]..=hi[1] {
        for x in lo[0]..=hi[0] {
            let s = st(x, y);
            if !raw.is_occupied(&s) && !reach.contains(&s) {
                filled.push(s);
            }
        }
    }
    let mut config = raw.config().clone();
    config.start = Some(start);
    GridWorld::new(config, filled).expect("fixture is well formed")
}

/// 12x12 free grid, 9x9 goal box in the upper corner, start outside it.
pub fn empty_box() -> GridWorld {
    grid(
        vec![12, 12],
        Connectivity::Full,
        GoalRegion::new(vec![3, 3], vec![11, 11]).unwrap(),
        Vec::new(),
        st(0, 0),
    )
}

/// 24x24 grid with a 20x20 goal box split by a 6x1 wall.
pub fn wall_split() -> GridWorld {
    let wall = (6..12).map(|x| st(x, 11)).collect();
    grid(
        vec![24, 24],
        Connectivity::Full,
        GoalRegion::new(vec![2, 2], vec![21, 21]).unwrap(),
        wall,
        st(0, 0),
    )
}

/// 50x50 grid, obstacle density drawn from [0.15, 0.25], 30x30 goal box.
/// Free cells not connected to the start at (2, 2) are filled in.
pub fn random_grid(seed: u64) -> GridWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density = rng.random_range(0.15..=0.25);
    let start = st(2, 2);
    let mut blocked = Vec::new();
    for y in 0..50 {
        for x in 0..50 {
            let s = st(x, y);
            if s != start && rng.random_bool(density) {
                blocked.push(s);
            }
        }
    }
    let goal = GoalRegion::new(vec![10, 10], vec![39, 39]).unwrap();
    connected_only(grid(vec![50, 50], Connectivity::Full, goal, blocked, start))
}

/// 80x60 map: an open start room, a solid wall four cells thick pierced by
/// two one-cell tunnels, and a cluttered goal room behind it. Sampling
/// planners need many vertices before a roadmap threads the tunnels.
pub fn corridor() -> GridWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let start = st(2, 2);
    let mut blocked = Vec::new();
    for y in 0..60 {
        for x in 20..24 {
            if y != 12 && y != 47 {
                blocked.push(st(x, y));
            }
        }
        for x in 30..80 {
            if rng.random_bool(0.15) {
                blocked.push(st(x, y));
            }
        }
    }
    let goal = GoalRegion::new(vec![36, 4], vec![75, 55]).unwrap();
    connected_only(grid(vec![80, 60], Connectivity::Full, goal, blocked, start))
}

/// Goal region made of two disjoint boxes. Greedy descent from one box
/// towards the other leaves the region, so the convexity check must fail.
pub fn two_box_goal() -> GridWorld {
    let goal = GoalRegion::union(vec![
        GoalBox::new(vec![1, 1], vec![4, 4]).unwrap(),
        GoalBox::new(vec![8, 8], vec![11, 11]).unwrap(),
    ])
    .unwrap();
    grid(vec![13, 13], Connectivity::Full, goal, Vec::new(), st(0, 0))
}

/// Goal box with every cell blocked.
pub fn blocked_goal() -> GridWorld {
    let blocked = (4..8).flat_map(|x| (4..8).map(move |y| st(x, y))).collect();
    grid(
        vec![10, 10],
        Connectivity::Full,
        GoalRegion::new(vec![4, 4], vec![7, 7]).unwrap(),
        blocked,
        st(0, 0),
    )
}

/// Three-link arm, 10 degrees per step, joints limited to +-90 degrees, a
/// 9x13x13 goal box and a few random circles. Scenes where some valid goal
/// state is not connected to the start are redrawn.
pub fn arm_scene(seed: u64) -> PlanarArm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let circles = (0..rng.random_range(2..=4))
            .map(|_| {
                let r = rng.random_range(0.9..2.3);
                let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                Circle {
                    center: [r * phi.cos(), r * phi.sin()],
                    radius: rng.random_range(0.08..0.25),
                }
            })
            .collect();
        let config = ArmConfig {
            links: vec![1.0, 0.8, 0.6],
            base: [0.0, 0.0],
            resolution_deg: vec![10.0; 3],
            limits: vec![[-9, 9]; 3],
            connectivity: Connectivity::Axis,
            weights: None,
            interpolation: 4,
            goal: vec![GoalBox::new(vec![-4, -6, -6], vec![4, 6, 6]).unwrap()],
            start: Some(vec![0, 0, 0]),
            circles,
            polygons: Vec::new(),
        };
        let arm = PlanarArm::new(config).expect("fixture is well formed");
        let start = arm.start().expect("start set");
        let reach = connected_component(&arm, &start);
        let goal_states = arm.goal_region().states(u64::MAX).expect("small goal box");
        let valid = goal_states.iter().filter(|s| arm.is_valid(s)).count();
        if valid > 0 && goal_states.iter().all(|s| !arm.is_valid(s) || reach.contains(s)) {
            return arm;
        }
    }
}
