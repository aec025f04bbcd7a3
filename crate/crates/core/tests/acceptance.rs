//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Expected values come from the oracles in
//! `common`, never from the code under test.

mod common;

use std::collections::HashSet;
use std::time::Instant;

use goalcover::bench::{run_benchmark, sample_queries, BenchConfig};
use goalcover::persist::{artifact_from_bytes, artifact_to_bytes, load_artifact};
use goalcover::{
    audit_path, check_goal_convexity, check_weak_monotonicity, compute_path, compute_reachability,
    find_covering_subregion, find_greedy_path, preprocess_region, profile_worst_case, prune_redundant, scenes, AStar,
    CheckBudget, Connectivity, Domain, GoalRegion, GridWorld, Lattice, PreprocessArtifact, PreprocessConfig, State,
};

use common::*;

const RANDOM_GRIDS: u64 = 20;
const ARM_SCENES: u64 = 5;
const COVERAGE_SECONDS: f64 = 120.0;
const EXACTNESS_MAX_GOAL_STATES: u64 = 10_000;
const SUBOPT_QUERIES_PER_GRID: usize = 30;
const SUBOPT_TOL: f64 = 1e-9;
const BENCH_QUERIES: usize = 200;
const PRM_MULTIPLE: f64 = 4.0;
const SOFT_RATIO: f64 = 5.0;
const EXHAUSTIVE_PAIRS: u64 = 5_000_000;

type Criterion = fn(&[Fixture]) -> (bool, String);

struct Fixture {
    name: String,
    domain: Domain,
    artifact: PreprocessArtifact,
}

fn config(seed: u64) -> PreprocessConfig {
    PreprocessConfig {
        seed,
        ..Default::default()
    }
}

fn build(name: String, domain: Domain, seed: u64) -> Result<Fixture, String> {
    let start = domain.default_start().ok_or_else(|| format!("{name}: no start"))?;
    let artifact = preprocess_region(&domain, &start, &AStar, &config(seed)).map_err(|e| format!("{name}: {e}"))?;
    Ok(Fixture { name, domain, artifact })
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, n: u32, title: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} criterion {n} ({title}): {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn all_goal_states<L: Lattice + ?Sized>(domain: &L) -> Vec<State> {
    domain.goal_region().states(u64::MAX).unwrap()
}

fn coverage(fixtures: &[Fixture], build_seconds: f64) -> (bool, String) {
    let t = Instant::now();
    let mut uncovered_total = 0;
    let mut states = 0;
    for f in fixtures {
        let valid = valid_goal_states(&f.domain);
        states += valid.len();
        uncovered_total += uncovered(&f.domain, &f.artifact.subregions).len();
        if !f.artifact.is_complete() {
            uncovered_total += f.artifact.orphans.len();
        }
    }
    let total = build_seconds + t.elapsed().as_secs_f64();
    (
        uncovered_total == 0 && total < COVERAGE_SECONDS,
        format!(
            "{} fixtures, {states} valid goal states, {uncovered_total} uncovered, {total:.1}s (limit {COVERAGE_SECONDS}s)",
            fixtures.len()
        ),
    )
}

fn query_success(fixtures: &[Fixture]) -> (bool, String) {
    let mut queries = 0;
    let mut failures = Vec::new();
    for f in fixtures {
        for goal in valid_goal_states(&f.domain) {
            queries += 1;
            let ok = match compute_path(&goal, &f.artifact, &f.domain) {
                Ok((p, _)) => {
                    audit_path(&f.domain, &p, &f.artifact.start, &goal).is_ok()
                        && path_is_valid(&f.domain, &p, &f.artifact.start, &goal)
                }
                Err(_) => false,
            };
            if !ok {
                failures.push(format!("{}:{goal}", f.name));
            }
        }
    }
    (
        failures.is_empty(),
        format!("{queries} queries, {} failed {:?}", failures.len(), &failures[..failures.len().min(5)]),
    )
}

fn reachable_exactness(fixtures: &[Fixture]) -> (bool, String) {
    let mut subregions = 0;
    let mut discrepancies = Vec::new();
    for f in fixtures {
        if f.domain.goal_region().len() > EXACTNESS_MAX_GOAL_STATES {
            continue;
        }
        let valid = valid_goal_states(&f.domain);
        for (i, r) in f.artifact.subregions.iter().enumerate() {
            subregions += 1;
            let ball: HashSet<State> = valid
                .iter()
                .filter(|s| f.domain.heuristic(s, &r.attractor) < r.radius)
                .cloned()
                .collect();
            let rerun = compute_reachability(&r.attractor, &f.domain, f.artifact.stats.epsilon, None).unwrap();
            let reach: HashSet<State> = rerun.reachable.keys().cloned().collect();
            let walks = ball.iter().all(|s| greedy_walk_valid(&f.domain, s, &r.attractor).is_some());
            if ball != reach || rerun.radius.to_bits() != r.radius.to_bits() || !walks {
                discrepancies.push(format!("{}#{i}", f.name));
            }
        }
    }
    (
        discrepancies.is_empty(),
        format!("{subregions} subregions, {} discrepancies {:?}", discrepancies.len(), discrepancies),
    )
}

fn zero_checks(fixtures: &[Fixture]) -> (bool, String) {
    let mut queries = 0u64;
    let mut worst = 0u64;
    for f in fixtures {
        for goal in valid_goal_states(&f.domain) {
            let before = f.domain.validity_checks();
            let Ok((_, stats)) = compute_path(&goal, &f.artifact, &f.domain) else {
                continue;
            };
            let counted = f.domain.validity_checks() - before;
            worst = worst.max(counted).max(stats.collision_checks);
            queries += 1;
        }
    }
    (worst == 0, format!("{queries} queries, max validity calls per query {worst}"))
}

fn work_bound(fixtures: &[Fixture]) -> (bool, String) {
    let mut violations = 0;
    let mut queries = 0;
    let mut tightest = 0.0f64;
    let mut errors = Vec::new();
    for f in fixtures {
        match profile_worst_case(&f.artifact, &f.domain, u64::MAX) {
            Ok(w) => {
                violations += w.violations.len() + usize::from(w.max_ops > w.ops_bound);
                queries += w.queries;
                tightest = tightest.max(w.max_ops as f64 / w.ops_bound.max(1) as f64);
            }
            Err(e) => errors.push(format!("{}: {e}", f.name)),
        }
    }
    (
        violations == 0 && errors.is_empty(),
        format!(
            "{queries} goals profiled, {violations} violations, worst ops/bound {tightest:.2}, errors {errors:?}"
        ),
    )
}

fn suboptimality(fixtures: &[Fixture]) -> (bool, String) {
    let mut checked = 0;
    let mut strict = 0;
    let mut violations = Vec::new();
    for f in fixtures.iter().filter(|f| f.name.starts_with("random_grid")) {
        let dist = dijkstra(&f.domain, &f.artifact.start);
        for r in &f.artifact.subregions {
            let lib = &f.artifact.library.paths[r.path_index as usize];
            if (lib.cost - dist[&r.attractor]).abs() > SUBOPT_TOL {
                violations.push(format!("{}: library path to {} not optimal", f.name, r.attractor));
            }
        }
        let seed = f.artifact.stats.seed;
        for goal in sample_queries(&f.domain, SUBOPT_QUERIES_PER_GRID, seed) {
            let (p, _) = compute_path(&goal, &f.artifact, &f.domain).unwrap();
            let (i, _) = find_covering_subregion(&goal, &f.artifact, &f.domain).unwrap();
            let r = &f.artifact.subregions[i];
            let tail = find_greedy_path(&r.attractor, &goal, r.depth, &f.domain).unwrap().path;
            let gap = p.cost - dist[&goal];
            if gap >= 2.0 * tail.cost + SUBOPT_TOL {
                violations.push(format!("{}: goal {goal} gap {gap} tail {}", f.name, tail.cost));
            }
            if gap < 2.0 * tail.cost {
                strict += 1;
            }
            checked += 1;
        }
    }
    (
        violations.is_empty() && checked >= 500,
        format!(
            "{checked} queries, {} violations at tolerance {SUBOPT_TOL:e}, {strict} strictly below the bound {:?}",
            violations.len(),
            &violations[..violations.len().min(3)]
        ),
    )
}

fn baseline() -> (bool, String) {
    let g = scenes::corridor();
    let start = g.start().unwrap().clone();
    let cfg = BenchConfig {
        queries: BENCH_QUERIES,
        seed: 0,
        prm_multiples: vec![PRM_MULTIPLE],
        rrt_timeout: None,
        preprocess: config(0),
    };
    let report = match run_benchmark(&g, &start, &AStar, &cfg) {
        Ok(r) => r,
        Err(e) => return (false, format!("benchmark failed: {e}")),
    };
    let ours: Vec<_> = report.records.iter().filter(|r| r.planner == "ours").collect();
    let prm: Vec<_> = report.records.iter().filter(|r| r.planner.starts_with("prm-")).collect();
    if ours.is_empty() || prm.is_empty() {
        return (false, "missing benchmark records".into());
    }
    let max = |v: &[&goalcover::bench::QueryRecord], f: fn(&goalcover::bench::QueryRecord) -> f64| {
        v.iter().map(|r| f(r)).fold(0.0, f64::max)
    };
    let mean = |v: &[&goalcover::bench::QueryRecord], f: fn(&goalcover::bench::QueryRecord) -> f64| {
        v.iter().map(|r| f(r)).sum::<f64>() / v.len() as f64
    };
    let median = |v: &[&goalcover::bench::QueryRecord]| {
        let mut w: Vec<f64> = v.iter().map(|r| r.wall_ms).collect();
        w.sort_by(f64::total_cmp);
        w[w.len() / 2]
    };
    let our_p100_ops = max(&ours, |r| r.ops as f64);
    let our_p100_ms = max(&ours, |r| r.wall_ms);
    let prm_mean_ops = mean(&prm, |r| r.ops as f64);
    let prm_mean_ms = mean(&prm, |r| r.wall_ms);
    let ratio = median(&prm) / median(&ours).max(1e-9);
    let our_success = ours.iter().all(|r| r.success);
    let prm_success = 100.0 * prm.iter().filter(|r| r.success).count() as f64 / prm.len() as f64;
    let ok = our_success && our_p100_ops < prm_mean_ops && our_p100_ms < prm_mean_ms;
    (
        ok,
        format!(
            "preprocess {:.2}s, prm budget {:.2}s; ours p100 {our_p100_ops} ops / {our_p100_ms:.4} ms vs prm mean \
             {prm_mean_ops:.0} ops / {prm_mean_ms:.4} ms; median wall ratio {ratio:.1}x (soft target {SOFT_RATIO}x {}); \
             prm success {prm_success:.0}%",
            report.preprocess_seconds,
            report.preprocess_seconds * PRM_MULTIPLE,
            if ratio >= SOFT_RATIO { "met" } else { "missed" },
        ),
    )
}

fn pruning(fixtures: &[Fixture]) -> (bool, String) {
    let mut mismatches = Vec::new();
    let mut before = 0;
    let mut after = 0;
    for (k, f) in fixtures.iter().enumerate() {
        let raw_cfg = PreprocessConfig {
            prune: false,
            ..config(f.artifact.stats.seed)
        };
        let raw = preprocess_region(&f.domain, &f.artifact.start, &AStar, &raw_cfg).unwrap();
        let pruned = prune_redundant(raw.subregions.clone(), &f.domain);
        before += raw.subregions.len();
        after += pruned.len();
        let states = all_goal_states(&f.domain);
        let union = |subs: &[goalcover::Subregion]| -> HashSet<State> {
            states.iter().filter(|s| subs.iter().any(|r| r.covers(&f.domain, s))).cloned().collect()
        };
        let attractors = |subs: &[goalcover::Subregion]| -> Vec<State> { subs.iter().map(|r| r.attractor.clone()).collect() };
        if union(&raw.subregions) != union(&pruned) || attractors(&pruned) != attractors(&f.artifact.subregions) {
            mismatches.push(format!("{k}:{}", f.name));
        }
    }
    (
        mismatches.is_empty(),
        format!(
            "{} fixtures, {before} subregions before pruning, {after} after, {} union mismatches {mismatches:?}",
            fixtures.len(),
            mismatches.len()
        ),
    )
}

fn checkers(fixtures: &[Fixture]) -> (bool, String) {
    let budget = CheckBudget {
        max_pairs: EXHAUSTIVE_PAIRS,
        ..Default::default()
    };
    let mut shipped_bad = Vec::new();
    let mut sampled = 0;
    for f in fixtures {
        let m = check_weak_monotonicity(&f.domain, &budget);
        let c = check_goal_convexity(&f.domain, &budget);
        sampled += usize::from(m.sampled) + usize::from(c.sampled);
        if !m.holds() || !c.holds() || m.sampled || c.sampled {
            shipped_bad.push(f.name.clone());
        }
    }
    let two_box = check_goal_convexity(&scenes::two_box_goal(), &budget);
    let warped = Warped {
        grid: GridWorld::new(
            goalcover::domains::GridConfig::new(
                vec![6, 6],
                Connectivity::Axis,
                GoalRegion::new(vec![0, 0], vec![5, 5]).unwrap(),
            ),
            [],
        )
        .unwrap(),
        a: State::new(vec![0, 0]),
        b: State::new(vec![4, 4]),
    };
    let mono = check_weak_monotonicity(&warped, &budget);
    let ok = shipped_bad.is_empty() && !two_box.holds() && !mono.holds();
    (
        ok,
        format!(
            "{} shipped fixtures clean except {shipped_bad:?} ({sampled} sampled reports); two-box convexity \
             violations {}, warped-heuristic monotonicity violations {}",
            fixtures.len(),
            two_box.violations.len(),
            mono.violations.len()
        ),
    )
}

fn determinism(fixtures: &[Fixture]) -> (bool, String) {
    let mut problems = Vec::new();
    let picks = fixtures
        .iter()
        .filter(|f| f.name == "wall_split" || f.name == "random_grid_0" || f.name == "arm_scene_0");
    let mut count = 0;
    for f in picks {
        count += 1;
        let again = preprocess_region(&f.domain, &f.artifact.start, &AStar, &config(f.artifact.stats.seed)).unwrap();
        let bytes = artifact_to_bytes(&f.artifact);
        if artifact_to_bytes(&again) != bytes {
            problems.push(format!("{}: rebuild differs", f.name));
        }
        match load_artifact(bytes.as_slice(), &f.domain) {
            Ok(mut back) => {
                back.stats.preprocess_seconds = f.artifact.stats.preprocess_seconds;
                if back != f.artifact || artifact_to_bytes(&back) != bytes {
                    problems.push(format!("{}: round trip differs", f.name));
                }
            }
            Err(e) => problems.push(format!("{}: load failed {e}", f.name)),
        }
        let mut accepted = 0;
        for i in 0..bytes.len() {
            let mut bad = bytes.clone();
            bad[i] ^= 0x5a;
            accepted += usize::from(artifact_from_bytes(&bad).is_ok());
        }
        for cut in [0, 4, bytes.len() / 2, bytes.len() - 1] {
            accepted += usize::from(artifact_from_bytes(&bytes[..cut]).is_ok());
        }
        if accepted > 0 {
            problems.push(format!("{}: {accepted} corrupted variants accepted", f.name));
        }
        let other = fixtures.iter().find(|o| o.domain.kind() == f.domain.kind() && o.name != f.name).unwrap();
        if load_artifact(bytes.as_slice(), &other.domain).is_ok() {
            problems.push(format!("{}: loaded against {}", f.name, other.name));
        }
    }
    (
        problems.is_empty() && count == 3,
        format!("{count} fixtures rebuilt, round-tripped and corrupted byte by byte; problems {problems:?}"),
    )
}

fn main() {
    let mut report = Report { failed: 0 };

    let t = Instant::now();
    let mut coverage_set = Vec::new();
    let mut build_errors = Vec::new();
    for seed in 0..RANDOM_GRIDS {
        match build(format!("random_grid_{seed}"), scenes::random_grid(seed).into(), seed) {
            Ok(f) => coverage_set.push(f),
            Err(e) => build_errors.push(e),
        }
    }
    for seed in 0..ARM_SCENES {
        match build(format!("arm_scene_{seed}"), scenes::arm_scene(seed).into(), seed) {
            Ok(f) => coverage_set.push(f),
            Err(e) => build_errors.push(e),
        }
    }
    let build_seconds = t.elapsed().as_secs_f64();
    let (ok, detail) = coverage(&coverage_set, build_seconds);
    report.line(
        1,
        "coverage",
        ok && build_errors.is_empty(),
        format!("{detail}; build errors {build_errors:?}"),
    );

    let mut fixtures = Vec::new();
    for (name, g) in [
        ("empty_box", scenes::empty_box()),
        ("wall_split", scenes::wall_split()),
        ("corridor", scenes::corridor()),
    ] {
        match build(name.into(), g.into(), 0) {
            Ok(f) => fixtures.push(f),
            Err(e) => build_errors.push(e),
        }
    }
    fixtures.extend(coverage_set);

    let criteria: [(u32, &str, Criterion); 8] = [
        (2, "query success", query_success),
        (3, "reachable set exactness", reachable_exactness),
        (4, "zero online collision checks", zero_checks),
        (5, "work bound", work_bound),
        (6, "additive suboptimality", suboptimality),
        (8, "pruning safety", pruning),
        (9, "assumption checkers", checkers),
        (10, "determinism and persistence", determinism),
    ];
    for (n, title, check) in criteria {
        if n == 8 {
            let (ok, detail) = baseline();
            report.line(7, "baseline comparison", ok, detail);
        }
        let (ok, detail) = check(&fixtures);
        report.line(n, title, ok, detail);
    }

    println!("acceptance: {} of 10 criteria failed", report.failed);
    if report.failed > 0 {
        std::process::exit(1);
    }
}
