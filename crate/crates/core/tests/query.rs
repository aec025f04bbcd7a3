mod common;

use goalcover::bench::sample_queries;
use goalcover::{
    audit_path, compute_path, find_covering_subregion, find_greedy_path, preprocess_region, profile_worst_case, scenes,
    AStar, GridWorld, Lattice, PreprocessArtifact, PreprocessConfig, QueryError, State,
};

use common::*;

fn st(c: &[i32]) -> State {
    State::new(c.to_vec())
}

fn build(g: &GridWorld, seed: u64) -> PreprocessArtifact {
    let cfg = PreprocessConfig {
        seed,
        ..Default::default()
    };
    preprocess_region(g, g.start().unwrap(), &AStar, &cfg).unwrap()
}

#[test]
fn attractor_goal_returns_the_library_path() {
    let g = scenes::wall_split();
    let a = build(&g, 1);
    // an attractor inside an earlier, larger ball is answered by that ball
    for (i, r) in a.subregions.iter().enumerate() {
        if find_covering_subregion(&r.attractor, &a, &g).unwrap().0 != i {
            continue;
        }
        let (p, stats) = compute_path(&r.attractor, &a, &g).unwrap();
        assert_eq!(p, a.library.paths[r.path_index as usize]);
        assert_eq!(stats.greedy_expansions, 0);
    }
    let (i, scans) = find_covering_subregion(&a.subregions[0].attractor, &a, &g).unwrap();
    assert_eq!((i, scans), (0, 1));
}

#[test]
fn empty_box_answers_every_goal_from_subregion_zero() {
    let g = scenes::empty_box();
    let a = build(&g, 0);
    for goal in g.goal_region().states(1000).unwrap() {
        assert_eq!(find_covering_subregion(&goal, &a, &g).unwrap().0, 0);
        let (p, stats) = compute_path(&goal, &a, &g).unwrap();
        assert!(path_is_valid(&g, &p, &a.start, &goal));
        assert_eq!(stats.collision_checks, 0);
    }
}

#[test]
fn greedy_walk_on_empty_box_descends_strictly() {
    let g = scenes::empty_box();
    let w = find_greedy_path(&st(&[4, 4]), &st(&[6, 7]), 10, &g).unwrap();
    let att = st(&[4, 4]);
    let h: Vec<f64> = w.path.states.iter().map(|s| g.heuristic(s, &att)).collect();
    assert!(h.windows(2).all(|p| p[0] < p[1]));
    assert!(path_is_valid(&g, &w.path, &att, &st(&[6, 7])));
    let single = find_greedy_path(&att, &att, 0, &g).unwrap();
    assert_eq!(single.path.states, vec![att]);
    assert_eq!(single.path.cost, 0.0);
}

#[test]
fn wall_split_paths_avoid_the_wall_without_checks() {
    let g = scenes::wall_split();
    let a = build(&g, 3);
    for goal in valid_goal_states(&g) {
        let before = g.validity_checks();
        let (p, stats) = compute_path(&goal, &a, &g).unwrap();
        assert_eq!(g.validity_checks(), before);
        assert_eq!(stats.collision_checks, 0);
        audit_path(&g, &p, &a.start, &goal).unwrap();
    }
}

#[test]
fn two_hundred_sampled_goals_succeed() {
    let g = scenes::wall_split();
    let a = build(&g, 4);
    let goals = sample_queries(&g, 200, 4);
    assert_eq!(goals.len(), 200);
    let ok = goals
        .iter()
        .filter(|goal| {
            compute_path(goal, &a, &g).is_ok_and(|(p, _)| path_is_valid(&g, &p, &a.start, goal))
        })
        .count();
    assert_eq!(ok, 200);
}

#[test]
fn out_of_region_and_blocked_goals_are_not_covered() {
    let g = scenes::wall_split();
    let a = build(&g, 0);
    assert_eq!(
        compute_path(&st(&[0, 0]), &a, &g).unwrap_err(),
        QueryError::NotCovered(st(&[0, 0]))
    );
    let b = scenes::blocked_goal();
    let ab = build(&b, 0);
    assert!(matches!(compute_path(&st(&[5, 5]), &ab, &b), Err(QueryError::NotCovered(_))));
}

#[test]
fn mismatched_domain_is_refused() {
    let g = scenes::wall_split();
    let a = build(&g, 0);
    let moved = g.with_blocked([st(&[20, 20])]).unwrap();
    assert!(matches!(
        compute_path(&st(&[5, 5]), &a, &moved),
        Err(QueryError::FingerprintMismatch { .. })
    ));
}

#[test]
fn same_goal_same_path() {
    let g = scenes::random_grid(6);
    let a = build(&g, 6);
    for goal in sample_queries(&g, 50, 1) {
        let (p1, _) = compute_path(&goal, &a, &g).unwrap();
        let (p2, _) = compute_path(&goal, &a, &g).unwrap();
        assert_eq!(p1.to_path_file(), p2.to_path_file());
        assert_eq!(p1.cost.to_bits(), p2.cost.to_bits());
    }
}

#[test]
fn profile_respects_the_work_bound() {
    for g in [scenes::empty_box(), scenes::wall_split(), scenes::random_grid(9)] {
        let a = build(&g, 9);
        let w = profile_worst_case(&a, &g, 1_000_000).unwrap();
        assert!(w.holds(), "{w:?}");
        assert_eq!(w.queries as usize, valid_goal_states(&g).len());
    }
    let g = scenes::empty_box();
    let a = build(&g, 0);
    let w = profile_worst_case(&a, &g, 1000).unwrap();
    assert!(w.max_ops <= 1 + a.subregions[0].depth as u64 * g.branching_factor() as u64);
}

#[test]
fn additive_suboptimality_bound_against_dijkstra() {
    let mut checked = 0;
    for seed in 0..3 {
        let g = scenes::random_grid(seed);
        let a = build(&g, seed);
        let dist = dijkstra(&g, &a.start);
        for goal in sample_queries(&g, 100, seed) {
            let (p, _) = compute_path(&goal, &a, &g).unwrap();
            let (i, _) = find_covering_subregion(&goal, &a, &g).unwrap();
            let r = &a.subregions[i];
            let tail = find_greedy_path(&r.attractor, &goal, r.depth, &g).unwrap().path;
            let c_star = dist[&goal];
            assert!(p.cost - c_star <= 2.0 * tail.cost + 1e-9, "goal {goal}");
            checked += 1;
        }
    }
    assert_eq!(checked, 300);
}

#[test]
fn reverse_path_runs_goal_to_start() {
    let g = scenes::wall_split();
    let a = build(&g, 0);
    let goal = st(&[15, 18]);
    let (p, _) = compute_path(&goal, &a, &g).unwrap();
    let back = p.reversed();
    assert!(path_is_valid(&g, &back, &goal, &a.start));
}
