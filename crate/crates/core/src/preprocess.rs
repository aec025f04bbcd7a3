//! Offline phase: decompose the goal region into attractor-centred
//! subregions, each a ball `{ s : h(s, attractor) < radius }` in which greedy
//! descent on `h` reaches the attractor through valid edges, and plan one
//! library path from the start to every attractor.
//!
//! The covering loop keeps two frontier queues. `V` holds valid states that
//! may become attractors; `I` holds invalid states from which a search for
//! valid, still uncovered states is launched once `V` runs dry. Both are FIFO
//! and may hold duplicates; coverage is re-checked when a state is popped.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::time::{Duration, Instant};

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assumptions::{check_goal_convexity, check_weak_monotonicity, CheckBudget};
use crate::error::{PlanError, PreprocessError};
use crate::lattice::{greedy_predecessor_counted, Lattice, State};
use crate::path::PlannedPath;
use crate::planners::OfflinePlanner;

/// Default radius slack added when a search exhausts its queue.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subregion {
    pub attractor: State,
    pub radius: f64,
    /// Longest greedy walk from a covered valid state to the attractor.
    pub depth: u32,
    pub path_index: u32,
}

impl Subregion {
    pub fn covers<L: Lattice + ?Sized>(&self, domain: &L, s: &State) -> bool {
        domain.heuristic(s, &self.attractor) < self.radius
    }
}

/// Ball around an invalid state whose interior holds nothing valid and
/// uncovered at the time it was recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvalidSubregion {
    pub center: State,
    pub radius: f64,
}

impl InvalidSubregion {
    pub fn covers<L: Lattice + ?Sized>(&self, domain: &L, s: &State) -> bool {
        domain.heuristic(s, &self.center) < self.radius
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PathLibrary {
    pub paths: Vec<PlannedPath>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessStats {
    pub seed: u64,
    pub epsilon: f64,
    /// Wall time of the whole run. Not persisted.
    #[serde(skip)]
    pub preprocess_seconds: f64,
    /// Timeout tiers that were actually run.
    pub tiers_used: u32,
    pub planner_calls: u32,
    /// Planner failures per tier.
    pub planner_failures: Vec<u32>,
    pub subregions_before_pruning: u32,
    pub reachability_runs: u32,
}

/// Everything the online phase needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessArtifact {
    /// Sorted by radius, largest first.
    pub subregions: Vec<Subregion>,
    pub invalid_subregions: Vec<InvalidSubregion>,
    pub library: PathLibrary,
    pub start: State,
    pub domain_fingerprint: u64,
    pub stats: PreprocessStats,
    /// Attractors that never got a library path. Non-empty means the valid
    /// states around them are not covered.
    pub orphans: Vec<State>,
}

impl PreprocessArtifact {
    pub fn empty(start: State, domain_fingerprint: u64) -> Self {
        PreprocessArtifact {
            subregions: Vec::new(),
            invalid_subregions: Vec::new(),
            library: PathLibrary::default(),
            start,
            domain_fingerprint,
            stats: PreprocessStats::default(),
            orphans: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.orphans.is_empty()
    }

    /// Index of the first subregion covering `s`.
    pub fn covering_index<L: Lattice + ?Sized>(&self, domain: &L, s: &State) -> Option<usize> {
        self.subregions.iter().position(|r| r.covers(domain, s))
    }

    pub fn max_depth(&self) -> u32 {
        self.subregions.iter().map(|r| r.depth).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct PreprocessConfig {
    /// Planner timeout per tier. Attractors that fail a tier are retried in
    /// the next one.
    pub timeout_schedule: Vec<Duration>,
    pub epsilon: f64,
    pub depth_cap: Option<u32>,
    pub seed: u64,
    /// Run a sampled assumption check before starting.
    pub sanity_check: bool,
    /// Drop subregions contained in larger ones. Off only for auditing.
    pub prune: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            timeout_schedule: vec![Duration::from_secs(10), Duration::from_secs(60)],
            epsilon: DEFAULT_EPSILON,
            depth_cap: None,
            seed: 0,
            sanity_check: true,
            prune: true,
        }
    }
}

#[derive(PartialEq)]
struct Keyed {
    h: f64,
    state: State,
}

impl Eq for Keyed {}

impl Ord for Keyed {
    // min-heap on h, ties to the lexicographically smaller state
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .h
            .total_cmp(&self.h)
            .then_with(|| other.state.cmp(&self.state))
    }
}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    /// Popped a valid state whose greedy predecessor is not reachable.
    Blocked(State),
    /// The next reachable state would exceed the depth cap.
    DepthCap(State),
    /// The queue ran dry.
    Exhausted,
}

/// Result of one reachability search.
#[derive(Clone, Debug)]
pub struct Reachability {
    /// Unfinished states to seed the covering loop with: what was left on
    /// OPEN in pop order, then reachable states lying exactly on the radius,
    /// then the terminating state.
    pub frontier: Vec<State>,
    pub radius: f64,
    pub depth: u32,
    /// Reachable states strictly inside the radius, with their greedy
    /// distance to the attractor.
    pub reachable: HashMap<State, u32>,
    /// Keys in pop order; non-decreasing.
    pub pop_keys: Vec<f64>,
    pub termination: Termination,
}

impl Reachability {
    pub fn reachable_size(&self) -> usize {
        self.reachable.len()
    }
}

/// Grow a subregion around `attractor` by best-first expansion on
/// `h(., attractor)` restricted to the goal region.
///
/// A popped state becomes reachable when its greedy predecessor is reachable
/// and the edge between them is valid. Invalid states are expanded but never
/// reachable. The search stops at the first popped valid state that is not
/// reachable; its `h` is the radius.
pub fn compute_reachability<L: Lattice + ?Sized>(
    attractor: &State,
    domain: &L,
    epsilon: f64,
    depth_cap: Option<u32>,
) -> Result<Reachability, PreprocessError> {
    let region = domain.goal_region();
    if attractor.dim() != domain.dimension() || !region.contains(attractor) || !domain.is_valid(attractor) {
        return Err(PreprocessError::InvalidAttractor(attractor.clone()));
    }
    let mut reachable: HashMap<State, u32> = HashMap::new();
    reachable.insert(attractor.clone(), 0);
    let mut closed: HashSet<State> = HashSet::new();
    closed.insert(attractor.clone());
    let mut open = BinaryHeap::new();
    for s in domain.succs(attractor) {
        if region.contains(&s) {
            open.push(Keyed {
                h: domain.heuristic(&s, attractor),
                state: s,
            });
        }
    }
    let mut depth = 0;
    let mut pop_keys = Vec::new();
    let mut last_h = 0.0;

    while let Some(Keyed { h, state }) = open.pop() {
        if !closed.insert(state.clone()) {
            continue;
        }
        pop_keys.push(h);
        last_h = h;
        let pred = greedy_predecessor_counted(domain, &state, attractor).map(|(p, _)| p);
        let pred_depth = pred.as_ref().and_then(|p| reachable.get(p).copied());
        let mut stop = None;
        match (pred, pred_depth) {
            (Some(p), Some(d)) if domain.is_edge_valid(&state, &p) => {
                if depth_cap.is_some_and(|cap| d + 1 > cap) {
                    stop = Some(Termination::DepthCap(state.clone()));
                } else {
                    depth = depth.max(d + 1);
                    reachable.insert(state.clone(), d + 1);
                }
            }
            _ => {
                if domain.is_valid(&state) {
                    stop = Some(Termination::Blocked(state.clone()));
                }
            }
        }
        if let Some(termination) = stop {
            let mut frontier = Vec::new();
            let mut seen = HashSet::new();
            while let Some(Keyed { state: s, .. }) = open.pop() {
                if !closed.contains(&s) && seen.insert(s.clone()) {
                    frontier.push(s);
                }
            }
            // Reachable states popped earlier at the same key sit on the
            // sphere h == radius, outside the open ball. Hand them back.
            let mut tied: Vec<State> = reachable
                .iter()
                .filter(|(s, _)| domain.heuristic(s, attractor) >= h)
                .map(|(s, _)| s.clone())
                .collect();
            tied.sort();
            for s in &tied {
                reachable.remove(s);
            }
            frontier.extend(tied);
            frontier.push(state);
            let depth = reachable.values().copied().max().unwrap_or(0);
            return Ok(Reachability {
                frontier,
                radius: h,
                depth,
                reachable,
                pop_keys,
                termination,
            });
        }
        for s in domain.succs(&state) {
            if region.contains(&s) && !closed.contains(&s) {
                open.push(Keyed {
                    h: domain.heuristic(&s, attractor),
                    state: s,
                });
            }
        }
    }
    Ok(Reachability {
        frontier: Vec::new(),
        radius: last_h + epsilon,
        depth,
        reachable,
        pop_keys,
        termination: Termination::Exhausted,
    })
}

/// Best-first search on `h(., center)` over successors and predecessors
/// inside the goal region, starting at the invalid state `center`. Returns
/// the first popped state that is valid and not covered by `subregions` (and
/// not in `exclude`), with its distance to `center` as radius. When nothing
/// qualifies, returns `None` and a radius just past the last popped state.
pub fn find_valid_uncovered_state<L: Lattice + ?Sized>(
    center: &State,
    subregions: &[Subregion],
    domain: &L,
    epsilon: f64,
    exclude: &HashSet<State>,
) -> (Option<State>, f64) {
    let region = domain.goal_region();
    let mut open = BinaryHeap::new();
    let mut closed: HashSet<State> = HashSet::new();
    open.push(Keyed {
        h: 0.0,
        state: center.clone(),
    });
    let mut last_h = 0.0;
    while let Some(Keyed { h, state }) = open.pop() {
        if !closed.insert(state.clone()) {
            continue;
        }
        last_h = h;
        let covered = subregions.iter().any(|r| r.covers(domain, &state));
        if !covered && !exclude.contains(&state) && domain.is_valid(&state) {
            return (Some(state), h);
        }
        for s in domain.succs(&state).into_iter().chain(domain.preds(&state)) {
            if region.contains(&s) && !closed.contains(&s) {
                open.push(Keyed {
                    h: domain.heuristic(&s, center),
                    state: s,
                });
            }
        }
    }
    (None, last_h + epsilon)
}

/// Sort by radius (largest first) and drop every subregion whose ball is
/// certified to lie inside an earlier one: `h(a_j, a_i) + r_j <= r_i`.
/// Relative order of equal radii is preserved.
pub fn prune_redundant<L: Lattice + ?Sized>(mut subregions: Vec<Subregion>, domain: &L) -> Vec<Subregion> {
    subregions.sort_by(|a, b| b.radius.total_cmp(&a.radius));
    let mut kept: Vec<Subregion> = Vec::with_capacity(subregions.len());
    for r in subregions {
        let contained = kept
            .iter()
            .any(|k| domain.heuristic(&r.attractor, &k.attractor) + r.radius <= k.radius);
        if !contained {
            kept.push(r);
        }
    }
    kept
}

fn sample_valid_state<L: Lattice + ?Sized>(domain: &L, rng: &mut ChaCha8Rng) -> Option<State> {
    let region = domain.goal_region();
    let tries = region.len().clamp(64, 100_000);
    for _ in 0..tries {
        let s = region.sample(rng);
        if domain.is_valid(&s) {
            return Some(s);
        }
    }
    // sparse free space: fall back to a scan
    region
        .states(u64::MAX)
        .ok()?
        .into_iter()
        .find(|s| domain.is_valid(s))
}

struct Cover<'a, L> {
    domain: &'a L,
    start: State,
    planner: &'a dyn OfflinePlanner,
    epsilon: f64,
    depth_cap: Option<u32>,
    subregions: Vec<Subregion>,
    invalid: Vec<InvalidSubregion>,
    paths: Vec<PlannedPath>,
    stats: PreprocessStats,
}

impl<L: Lattice> Cover<'_, L> {
    fn covered(&self, s: &State) -> bool {
        self.subregions.iter().any(|r| r.covers(self.domain, s))
    }

    fn covered_any(&self, s: &State) -> bool {
        self.covered(s) || self.invalid.iter().any(|r| r.covers(self.domain, s))
    }

    /// One pass of the covering loop at a fixed planner timeout. Returns the
    /// attractors whose planning failed and that are still uncovered.
    fn run(&mut self, seeds: Vec<State>, timeout: Duration, tier: usize) -> Result<Vec<State>, PreprocessError> {
        let mut valid: VecDeque<State> = seeds.into();
        let mut invalid: VecDeque<State> = VecDeque::new();
        let mut bad: Vec<State> = Vec::new();
        let mut bad_set: HashSet<State> = HashSet::new();
        while !valid.is_empty() || !invalid.is_empty() {
            while let Some(s) = valid.pop_front() {
                if bad_set.contains(&s) || self.covered(&s) {
                    continue;
                }
                let t0 = Instant::now();
                self.stats.planner_calls += 1;
                let path = match self.planner.plan(self.domain, &self.start, &s, timeout) {
                    Ok(p) => p,
                    Err(e) => {
                        self.stats.planner_failures[tier] += 1;
                        let why = match e {
                            PlanError::Timeout => "timeout",
                            PlanError::Disconnected => "disconnected",
                            PlanError::InvalidEndpoint(_) => "invalid endpoint",
                        };
                        warn!("bad attractor {s} at tier {tier}: {why}");
                        bad_set.insert(s.clone());
                        bad.push(s);
                        continue;
                    }
                };
                let planner_ms = t0.elapsed().as_secs_f64() * 1e3;
                let reach = compute_reachability(&s, self.domain, self.epsilon, self.depth_cap)?;
                self.stats.reachability_runs += 1;
                for f in reach.frontier {
                    if self.domain.is_valid(&f) {
                        valid.push_back(f);
                    } else {
                        invalid.push_back(f);
                    }
                }
                info!(
                    "subregion index={} radius={:.6} depth={} reachable_size={} planner_ms={:.3}",
                    self.subregions.len(),
                    reach.radius,
                    reach.depth,
                    reach.reachable.len(),
                    planner_ms
                );
                self.subregions.push(Subregion {
                    attractor: s,
                    radius: reach.radius,
                    depth: reach.depth,
                    path_index: self.paths.len() as u32,
                });
                self.paths.push(path);
            }
            while let Some(s) = invalid.pop_front() {
                if self.covered_any(&s) {
                    continue;
                }
                let (found, radius) =
                    find_valid_uncovered_state(&s, &self.subregions, self.domain, self.epsilon, &bad_set);
                self.invalid.push(InvalidSubregion { center: s, radius });
                if let Some(x) = found {
                    valid.push_back(x);
                    break;
                }
            }
        }
        Ok(bad.into_iter().filter(|s| !self.covered(s)).collect())
    }
}

/// Run the full offline phase: covering loop, tiered retry of attractors the
/// planner failed on, redundancy pruning and radius ordering.
pub fn preprocess_region<L: Lattice + ?Sized>(
    domain: &L,
    start: &State,
    planner: &dyn OfflinePlanner,
    config: &PreprocessConfig,
) -> Result<PreprocessArtifact, PreprocessError> {
    let t0 = Instant::now();
    if start.dim() != domain.dimension() || !domain.contains(start) || !domain.is_valid(start) {
        return Err(PreprocessError::StartInvalid(start.clone()));
    }
    if config.sanity_check {
        let budget = CheckBudget::sanity(config.seed);
        let bad = check_weak_monotonicity(domain, &budget).violations.len()
            + check_goal_convexity(domain, &budget).violations.len();
        if bad > 0 {
            return Err(PreprocessError::AssumptionViolated(bad));
        }
    }
    let mut artifact = PreprocessArtifact::empty(start.clone(), domain.fingerprint());
    artifact.stats.seed = config.seed;
    artifact.stats.epsilon = config.epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let Some(seed_state) = sample_valid_state(domain, &mut rng) else {
        warn!("goal region holds no valid state; nothing to cover");
        artifact.stats.preprocess_seconds = t0.elapsed().as_secs_f64();
        return Ok(artifact);
    };

    let tiers = config.timeout_schedule.len().max(1);
    let mut cover = Cover {
        domain: &domain,
        start: start.clone(),
        planner,
        epsilon: config.epsilon,
        depth_cap: config.depth_cap,
        subregions: Vec::new(),
        invalid: Vec::new(),
        paths: Vec::new(),
        stats: PreprocessStats {
            planner_failures: vec![0; tiers],
            ..artifact.stats.clone()
        },
    };
    let mut seeds = vec![seed_state];
    let mut orphans = Vec::new();
    for tier in 0..tiers {
        let timeout = config
            .timeout_schedule
            .get(tier)
            .copied()
            .unwrap_or(Duration::from_secs(10));
        cover.stats.tiers_used = tier as u32 + 1;
        let bad = cover.run(seeds, timeout, tier)?;
        if bad.is_empty() {
            orphans.clear();
            break;
        }
        orphans = bad.clone();
        seeds = bad;
    }

    let Cover {
        subregions,
        invalid,
        paths,
        mut stats,
        ..
    } = cover;
    stats.subregions_before_pruning = subregions.len() as u32;
    let kept = if config.prune {
        prune_redundant(subregions, domain)
    } else {
        let mut all = subregions;
        all.sort_by(|a, b| b.radius.total_cmp(&a.radius));
        all
    };
    // compact the library to the surviving attractors
    let mut library = PathLibrary::default();
    let mut remap = HashMap::new();
    let subregions = kept
        .into_iter()
        .map(|mut r| {
            let new = *remap.entry(r.path_index).or_insert_with(|| {
                library.paths.push(paths[r.path_index as usize].clone());
                library.paths.len() as u32 - 1
            });
            r.path_index = new;
            r
        })
        .collect();
    stats.preprocess_seconds = t0.elapsed().as_secs_f64();
    artifact.subregions = subregions;
    artifact.invalid_subregions = invalid;
    artifact.library = library;
    artifact.stats = stats;
    artifact.orphans = orphans.clone();
    info!(
        "preprocess done subregions={} invalid_subregions={} orphans={} seconds={:.3}",
        artifact.subregions.len(),
        artifact.invalid_subregions.len(),
        orphans.len(),
        artifact.stats.preprocess_seconds
    );
    if orphans.is_empty() {
        Ok(artifact)
    } else {
        Err(PreprocessError::PlannerFailure {
            artifact: Box::new(artifact),
            orphans,
        })
    }
}
