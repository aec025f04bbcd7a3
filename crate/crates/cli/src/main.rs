//! `goalcover` command-line tool.
//!
//! Usage errors exit with status 2 (reported by clap). Data errors exit with
//! status 1 and print one line `error: category=<Category> message=<text>`
//! on stderr.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use goalcover::bench::{run_benchmark, BenchConfig};
use goalcover::persist::{artifact_to_json, load_artifact_file, save_artifact_file};
use goalcover::{
    audit_artifact, check_goal_convexity, check_tie_break_order, check_weak_monotonicity, compute_path,
    preprocess_region, profile_worst_case, scenes, AStar, AssumptionReport, CheckBudget, Domain, Lattice,
    PreprocessConfig, PreprocessError, State,
};

#[derive(Parser)]
#[command(name = "goalcover", version, about = "Goal-region preprocessing for bounded-time planning queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cover the goal region of a domain and write the artifact.
    Preprocess {
        /// Grid map file, or `.toml` arm scene.
        domain: PathBuf,
        /// Artifact file to write.
        #[arg(short, long)]
        output: PathBuf,
        /// Start state, comma separated. Defaults to the start in the domain file.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<i32>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Offline planner timeout per tier, in seconds.
        #[arg(long, value_delimiter = ',', default_value = "10,60")]
        timeouts: Vec<f64>,
        #[arg(long, default_value_t = goalcover::preprocess::DEFAULT_EPSILON)]
        epsilon: f64,
        /// Stop growing a subregion once its greedy depth reaches this value.
        #[arg(long)]
        depth_cap: Option<u32>,
        /// Skip the sampled assumption check before covering.
        #[arg(long)]
        no_sanity_check: bool,
        /// Also write the artifact as JSON, for inspection.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Answer one goal from an artifact. Prints the path then a stats line.
    Query {
        domain: PathBuf,
        artifact: PathBuf,
        /// Goal state, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        goal: Vec<i32>,
        /// Write the path here instead of printing it.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Query every valid goal state and report the worst case.
    Profile {
        domain: PathBuf,
        artifact: PathBuf,
        /// Refuse goal regions with more states than this.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
    },
    /// Check the heuristic assumptions, and audit an artifact if given.
    Validate {
        domain: PathBuf,
        #[arg(long)]
        artifact: Option<PathBuf>,
        /// Ordered pairs checked exhaustively before falling back to sampling.
        #[arg(long, default_value_t = 4_000_000)]
        max_pairs: u64,
        /// Sampled pairs when the exhaustive check does not fit.
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a benchmark scenario and write the summary CSV.
    Bench {
        /// Scenario TOML file.
        scenario: PathBuf,
        /// Summary CSV; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Per-query records CSV.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Write one of the built-in fixture domains to a file.
    Scene {
        #[arg(value_enum)]
        name: SceneName,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SceneName {
    EmptyBox,
    WallSplit,
    RandomGrid,
    Corridor,
    TwoBox,
    BlockedGoal,
    Arm,
}

/// Benchmark scenario file. Paths are relative to the scenario file.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Scenario {
    domain: PathBuf,
    start: Option<Vec<i32>>,
    #[serde(default = "default_queries")]
    queries: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_multiples")]
    prm_multiples: Vec<f64>,
    /// Also plan every query from scratch with RRT-Connect at this timeout.
    rrt_timeout_s: Option<f64>,
    #[serde(default = "default_timeouts")]
    timeouts_s: Vec<f64>,
}

fn default_queries() -> usize {
    200
}

fn default_multiples() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}

fn default_timeouts() -> Vec<f64> {
    vec![10.0, 60.0]
}

struct Failure {
    category: String,
    message: String,
}

impl Failure {
    fn new(category: &str, message: impl std::fmt::Display) -> Self {
        Failure {
            category: category.to_string(),
            message: message.to_string(),
        }
    }
}

macro_rules! impl_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::new(e.category(), &e)
            }
        }
    )*};
}

impl_from!(
    goalcover::DomainError,
    goalcover::PreprocessError,
    goalcover::QueryError,
    goalcover::PersistError
);

impl From<goalcover::LatticeError> for Failure {
    fn from(e: goalcover::LatticeError) -> Self {
        Failure::new("LatticeError", e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new("IoError", e)
    }
}

fn state_for(domain: &Domain, coords: Vec<i32>) -> Result<State, Failure> {
    if coords.len() != domain.dimension() {
        return Err(Failure::new(
            "DimensionMismatch",
            format!("expected {} coordinates, got {}", domain.dimension(), coords.len()),
        ));
    }
    Ok(State::new(coords))
}

fn durations(secs: &[f64]) -> Result<Vec<Duration>, Failure> {
    secs.iter()
        .map(|&s| Duration::try_from_secs_f64(s).map_err(|e| Failure::new("ConfigError", format!("timeout {s}: {e}"))))
        .collect()
}

fn start_for(domain: &Domain, start: Option<Vec<i32>>) -> Result<State, Failure> {
    match start {
        Some(c) => state_for(domain, c),
        None => domain
            .default_start()
            .ok_or_else(|| Failure::new("ConfigError", "no start given and the domain file has none")),
    }
}

fn print_report(out: &mut impl Write, r: &AssumptionReport) -> io::Result<()> {
    writeln!(
        out,
        "check {} holds={} pairs_checked={} sampled={} violations={}",
        r.name,
        r.holds(),
        r.pairs_checked,
        r.sampled,
        r.violations.len()
    )?;
    for (a, b) in r.violations.iter().take(20) {
        writeln!(out, "  violation {a} -> {b}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Preprocess {
            domain,
            output,
            start,
            seed,
            timeouts,
            epsilon,
            depth_cap,
            no_sanity_check,
            json,
        } => {
            let domain = Domain::load(&domain)?;
            let start = start_for(&domain, start)?;
            let config = PreprocessConfig {
                timeout_schedule: durations(&timeouts)?,
                epsilon,
                depth_cap,
                seed,
                sanity_check: !no_sanity_check,
                prune: true,
            };
            let (artifact, failure) = match preprocess_region(&domain, &start, &AStar, &config) {
                Ok(a) => (a, None),
                Err(PreprocessError::PlannerFailure { artifact, orphans }) => {
                    let msg = format!("{} attractor(s) unreachable; incomplete artifact written", orphans.len());
                    (*artifact, Some(Failure::new("PlannerFailure", msg)))
                }
                Err(e) => return Err(e.into()),
            };
            save_artifact_file(&artifact, &output)?;
            if let Some(path) = json {
                fs::write(path, artifact_to_json(&artifact))?;
            }
            writeln!(
                out,
                "subregions={} invalid_subregions={} max_depth={} planner_calls={} seconds={:.3}",
                artifact.subregions.len(),
                artifact.invalid_subregions.len(),
                artifact.max_depth(),
                artifact.stats.planner_calls,
                artifact.stats.preprocess_seconds
            )?;
            if let Some(f) = failure {
                return Err(f);
            }
        }
        Command::Query {
            domain,
            artifact,
            goal,
            output,
        } => {
            let domain = Domain::load(&domain)?;
            let artifact = load_artifact_file(&artifact, &domain)?;
            let goal = state_for(&domain, goal)?;
            let (path, stats) = compute_path(&goal, &artifact, &domain)?;
            match output {
                Some(p) => path.write_path_file(p)?,
                None => write!(out, "{}", path.to_path_file())?,
            }
            writeln!(out, "stats cost={:.6} states={} {}", path.cost, path.len(), stats.to_record())?;
        }
        Command::Profile {
            domain,
            artifact,
            budget,
        } => {
            let domain = Domain::load(&domain)?;
            let artifact = load_artifact_file(&artifact, &domain)?;
            let w = profile_worst_case(&artifact, &domain, budget)?;
            writeln!(
                out,
                "queries={} max_ops={} ops_bound={} max_wall_time_s={:.9} max_collision_checks={} violations={} argmax_goal={}",
                w.queries,
                w.max_ops,
                w.ops_bound,
                w.max_wall_time.as_secs_f64(),
                w.max_collision_checks,
                w.violations.len(),
                w.argmax_goal.as_ref().map_or("-".to_string(), |g| g.to_string())
            )?;
            if !w.holds() {
                return Err(Failure::new(
                    "WorkBoundViolated",
                    format!("{} goal(s) exceeded a per-query bound", w.violations.len().max(1)),
                ));
            }
        }
        Command::Validate {
            domain,
            artifact,
            max_pairs,
            samples,
            seed,
        } => {
            let domain = Domain::load(&domain)?;
            let budget = CheckBudget {
                max_pairs,
                samples,
                seed,
            };
            let reports = [
                check_weak_monotonicity(&domain, &budget),
                check_goal_convexity(&domain, &budget),
                check_tie_break_order(&domain, samples.min(10_000), seed),
            ];
            for r in &reports {
                print_report(&mut out, r)?;
            }
            let mut failed: Vec<String> = reports.iter().filter(|r| !r.holds()).map(|r| r.name.clone()).collect();
            if let Some(path) = artifact {
                let artifact = load_artifact_file(&path, &domain)?;
                let audit = audit_artifact(&artifact, &domain, max_pairs.max(1_000_000))?;
                writeln!(
                    out,
                    "audit holds={} goal_states={} subregions={} uncovered={} reachability_mismatches={} walk_failures={}",
                    audit.holds(),
                    audit.goal_states,
                    audit.subregions,
                    audit.uncovered.len(),
                    audit.reachability_mismatches.len(),
                    audit.walk_failures.len()
                )?;
                if !audit.holds() {
                    failed.push("artifact_audit".into());
                }
            }
            if !failed.is_empty() {
                return Err(Failure::new("AssumptionViolated", format!("failed: {}", failed.join(", "))));
            }
        }
        Command::Bench {
            scenario,
            output,
            records,
        } => {
            let text = fs::read_to_string(&scenario)?;
            let sc: Scenario = toml::from_str(&text).map_err(|e| Failure::new("ParseError", e))?;
            let base = scenario.parent().unwrap_or(Path::new("."));
            let domain = Domain::load(base.join(&sc.domain))?;
            let start = start_for(&domain, sc.start)?;
            let config = BenchConfig {
                queries: sc.queries,
                seed: sc.seed,
                prm_multiples: sc.prm_multiples,
                rrt_timeout: sc.rrt_timeout_s.map(|s| durations(&[s])).transpose()?.map(|v| v[0]),
                preprocess: PreprocessConfig {
                    timeout_schedule: durations(&sc.timeouts_s)?,
                    seed: sc.seed,
                    ..Default::default()
                },
            };
            let report = run_benchmark(&domain, &start, &AStar, &config)?;
            let csv_err = |e| Failure::new("IoError", e);
            match output {
                Some(p) => report.write_summary_csv(fs::File::create(p)?).map_err(csv_err)?,
                None => report.write_summary_csv(&mut out).map_err(csv_err)?,
            }
            if let Some(p) = records {
                report.write_records_csv(fs::File::create(p)?).map_err(csv_err)?;
            }
        }
        Command::Scene { name, output, seed } => {
            let text = match name {
                SceneName::EmptyBox => scenes::empty_box().to_map_string(),
                SceneName::WallSplit => scenes::wall_split().to_map_string(),
                SceneName::RandomGrid => scenes::random_grid(seed).to_map_string(),
                SceneName::Corridor => scenes::corridor().to_map_string(),
                SceneName::TwoBox => scenes::two_box_goal().to_map_string(),
                SceneName::BlockedGoal => scenes::blocked_goal().to_map_string(),
                SceneName::Arm => scenes::arm_scene(seed).to_toml_string(),
            };
            fs::write(output, text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::debug!("command failed in category {}", f.category);
            eprintln!("error: category={} message={}", f.category, f.message);
            ExitCode::from(1)
        }
    }
}
