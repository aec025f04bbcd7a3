//! Benchmark harness: one seeded query set run through our method, PRM-lite
//! at preprocessing budgets that are multiples of our preprocessing time,
//! and optionally RRT-Connect from scratch per query.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::PreprocessError;
use crate::lattice::{Lattice, State};
use crate::path::audit_path;
use crate::persist::{artifact_to_bytes, roadmap_to_bytes};
use crate::planners::{prm_build, prm_query, OfflinePlanner, PrmBudget, PrmConfig, RrtConnect};
use crate::preprocess::{preprocess_region, PreprocessConfig};
use crate::query::compute_path;

/// Column order of the summary CSV.
pub const SUMMARY_HEADER: [&str; 6] = ["planner", "budget_s", "mean_ms", "p100_ms", "success_pct", "memory_bytes"];

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub queries: usize,
    pub seed: u64,
    /// PRM-lite build budgets as multiples of our preprocessing time.
    pub prm_multiples: Vec<f64>,
    /// Plan every query from scratch with RRT-Connect at this timeout.
    pub rrt_timeout: Option<Duration>,
    pub preprocess: PreprocessConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            queries: 200,
            seed: 0,
            prm_multiples: vec![0.5, 1.0, 2.0, 4.0],
            rrt_timeout: None,
            preprocess: PreprocessConfig::default(),
        }
    }
}

/// One summary row; serializes to exactly [`SUMMARY_HEADER`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub planner: String,
    pub budget_s: f64,
    pub mean_ms: f64,
    pub p100_ms: f64,
    pub success_pct: f64,
    pub memory_bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryRecord {
    pub planner: String,
    pub budget_s: f64,
    pub query: usize,
    pub goal: String,
    pub success: bool,
    pub wall_ms: f64,
    /// Online work: subregion scans plus predecessor evaluations for ours,
    /// distance evaluations plus edge checks for PRM-lite, zero for RRT.
    pub ops: u64,
    pub collision_checks: u64,
    pub cost: f64,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub records: Vec<QueryRecord>,
    pub preprocess_seconds: f64,
}

impl BenchReport {
    pub fn records_for<'a>(&'a self, planner: &'a str, budget_s: f64) -> impl Iterator<Item = &'a QueryRecord> {
        self.records
            .iter()
            .filter(move |r| r.planner == planner && r.budget_s == budget_s)
    }

    pub fn write_summary_csv<W: Write>(&self, sink: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        if self.rows.is_empty() {
            w.write_record(SUMMARY_HEADER)?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_records_csv<W: Write>(&self, sink: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `n` goal states drawn uniformly (with replacement) from the valid part of
/// the goal region.
pub fn sample_queries<L: Lattice + ?Sized>(domain: &L, n: usize, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = domain.goal_region();
    let mut out = Vec::with_capacity(n);
    let mut misses = 0usize;
    while out.len() < n && misses < 1_000_000 {
        let s = region.sample(&mut rng);
        if domain.is_valid(&s) {
            out.push(s);
        } else {
            misses += 1;
        }
    }
    out
}

fn summarize(planner: &str, budget_s: f64, records: &[QueryRecord], memory_bytes: u64) -> BenchRow {
    let n = records.len().max(1) as f64;
    BenchRow {
        planner: planner.to_string(),
        budget_s,
        mean_ms: records.iter().map(|r| r.wall_ms).sum::<f64>() / n,
        p100_ms: records.iter().map(|r| r.wall_ms).fold(0.0, f64::max),
        success_pct: 100.0 * records.iter().filter(|r| r.success).count() as f64 / n,
        memory_bytes,
    }
}

fn goal_text(s: &State) -> String {
    s.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

/// Run the comparison. Timings cover the online phase only; every returned
/// path is audited afterwards and counts as a failure if it does not pass.
pub fn run_benchmark<L: Lattice>(
    domain: &L,
    start: &State,
    offline: &dyn OfflinePlanner,
    config: &BenchConfig,
) -> Result<BenchReport, PreprocessError> {
    let queries = sample_queries(domain, config.queries, config.seed);
    let mut report = BenchReport::default();

    let t0 = Instant::now();
    let artifact = match preprocess_region(domain, start, offline, &config.preprocess) {
        Ok(a) => a,
        Err(PreprocessError::PlannerFailure { artifact, .. }) => *artifact,
        Err(e) => return Err(e),
    };
    let t_pre = t0.elapsed().as_secs_f64();
    report.preprocess_seconds = t_pre;

    let mut recs = Vec::new();
    for (i, goal) in queries.iter().enumerate() {
        let t = Instant::now();
        let result = compute_path(goal, &artifact, domain);
        let wall_ms = t.elapsed().as_secs_f64() * 1e3;
        let (success, ops, checks, cost) = match result {
            Ok((path, stats)) => (
                audit_path(domain, &path, start, goal).is_ok(),
                stats.ops(),
                stats.collision_checks,
                path.cost,
            ),
            Err(_) => (false, 0, 0, f64::NAN),
        };
        recs.push(QueryRecord {
            planner: "ours".into(),
            budget_s: t_pre,
            query: i,
            goal: goal_text(goal),
            success,
            wall_ms,
            ops,
            collision_checks: checks,
            cost,
        });
    }
    report
        .rows
        .push(summarize("ours", t_pre, &recs, artifact_to_bytes(&artifact).len() as u64));
    report.records.extend(recs);

    for &m in &config.prm_multiples {
        let budget = Duration::from_secs_f64(t_pre * m);
        let map = prm_build(domain, start, &PrmConfig::new(PrmBudget::WallClock(budget), config.seed));
        let name = format!("prm-{m}x");
        let mut recs = Vec::new();
        for (i, goal) in queries.iter().enumerate() {
            let before = domain.validity_checks();
            let t = Instant::now();
            let (path, cost) = prm_query(&map, domain, goal);
            let wall_ms = t.elapsed().as_secs_f64() * 1e3;
            let checks = domain.validity_checks() - before;
            let ok = path.as_ref().is_some_and(|p| audit_path(domain, p, start, goal).is_ok());
            recs.push(QueryRecord {
                planner: name.clone(),
                budget_s: budget.as_secs_f64(),
                query: i,
                goal: goal_text(goal),
                success: ok,
                wall_ms,
                ops: cost.ops(),
                collision_checks: checks,
                cost: path.map_or(f64::NAN, |p| p.cost),
            });
        }
        report.rows.push(summarize(
            &name,
            budget.as_secs_f64(),
            &recs,
            roadmap_to_bytes(&map).len() as u64,
        ));
        report.records.extend(recs);
    }

    if let Some(timeout) = config.rrt_timeout {
        let rrt = RrtConnect::with_seed(config.seed);
        let mut recs = Vec::new();
        for (i, goal) in queries.iter().enumerate() {
            let before = domain.validity_checks();
            let t = Instant::now();
            let result = rrt.solve(domain, start, goal, timeout);
            let wall_ms = t.elapsed().as_secs_f64() * 1e3;
            let checks = domain.validity_checks() - before;
            let ok = result.as_ref().is_ok_and(|p| audit_path(domain, p, start, goal).is_ok());
            recs.push(QueryRecord {
                planner: "rrt-connect".into(),
                budget_s: timeout.as_secs_f64(),
                query: i,
                goal: goal_text(goal),
                success: ok,
                wall_ms,
                ops: 0,
                collision_checks: checks,
                cost: result.map_or(f64::NAN, |p| p.cost),
            });
        }
        report
            .rows
            .push(summarize("rrt-connect", timeout.as_secs_f64(), &recs, 0));
        report.records.extend(recs);
    }
    Ok(report)
}
