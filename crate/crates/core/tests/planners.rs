mod common;

use std::time::Duration;

use goalcover::planners::{astar_plan, prm_build, prm_query, rrt_connect_plan, PrmBudget, PrmConfig};
use goalcover::{audit_path, scenes, Lattice, PlanError, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

#[test]
fn astar_matches_dijkstra_on_random_grids() {
    for seed in 0..4 {
        let g = scenes::random_grid(seed);
        let start = g.start().unwrap().clone();
        let dist = dijkstra(&g, &start);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut done = 0;
        while done < 40 {
            let goal = State::new(vec![rng.random_range(0..50), rng.random_range(0..50)]);
            if !g.is_valid(&goal) {
                continue;
            }
            let p = astar_plan(&start, &goal, &g, Duration::from_secs(10)).unwrap();
            audit_path(&g, &p, &start, &goal).unwrap();
            assert!((p.cost - dist[&goal]).abs() < 1e-9, "goal {goal}");
            done += 1;
        }
    }
}

#[test]
fn astar_reports_invalid_endpoints() {
    let g = scenes::wall_split();
    let r = astar_plan(&State::new(vec![0, 0]), &State::new(vec![6, 11]), &g, Duration::from_secs(1));
    assert!(matches!(r, Err(PlanError::InvalidEndpoint(_))));
}

#[test]
fn rrt_connect_paths_pass_the_auditor_and_repeat() {
    let g = scenes::random_grid(1);
    let start = g.start().unwrap().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..10 {
        let goal = loop {
            let s = State::new(vec![rng.random_range(10..40), rng.random_range(10..40)]);
            if g.is_valid(&s) {
                break s;
            }
        };
        let p = rrt_connect_plan(&start, &goal, &g, Duration::from_secs(10), i).unwrap();
        audit_path(&g, &p, &start, &goal).unwrap();
        let q = rrt_connect_plan(&start, &goal, &g, Duration::from_secs(10), i).unwrap();
        assert_eq!(p, q);
    }
}

#[test]
fn rrt_connect_works_on_the_arm() {
    let arm = scenes::arm_scene(2);
    let start = arm.start().unwrap();
    let goal = State::new(vec![4, -6, 6]);
    if arm.is_valid(&goal) {
        let p = rrt_connect_plan(&start, &goal, &arm, Duration::from_secs(10), 1).unwrap();
        audit_path(&arm, &p, &start, &goal).unwrap();
    }
}

#[test]
fn prm_paths_pass_the_auditor_and_builds_repeat() {
    let g = scenes::random_grid(2);
    let start = g.start().unwrap().clone();
    let cfg = PrmConfig::new(PrmBudget::Vertices(300), 5);
    let map = prm_build(&g, &start, &cfg);
    assert_eq!(map, prm_build(&g, &start, &cfg));
    for &(u, v, _) in &map.edges {
        assert!(g.is_valid(&map.vertices[u as usize]) && g.is_valid(&map.vertices[v as usize]));
    }
    let mut ok = 0;
    for goal in goalcover::bench::sample_queries(&g, 100, 1) {
        if let (Some(p), _) = prm_query(&map, &g, &goal) {
            audit_path(&g, &p, &start, &goal).unwrap();
            ok += 1;
        }
    }
    assert!(ok > 50, "only {ok} of 100 answered");
}

#[test]
fn prm_with_small_budget_fails_in_the_corridor() {
    let g = scenes::corridor();
    let start = g.start().unwrap().clone();
    let map = prm_build(&g, &start, &PrmConfig::new(PrmBudget::Vertices(40), 1));
    let goals = goalcover::bench::sample_queries(&g, 100, 2);
    let ok = goals.iter().filter(|goal| prm_query(&map, &g, goal).0.is_some()).count();
    assert!(ok < 100);
}
