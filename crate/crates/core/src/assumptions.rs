//! Executable checks for the heuristic assumptions the covering algorithm
//! relies on: weak monotonicity and convexity of the goal box with respect to
//! `h`, plus a sampled sanity check of the tie-break order.
//!
//! These are advisory tools. Exhaustive checks are quadratic in the size of the
//! goal region, so above `max_pairs` they fall back to uniformly sampled pairs
//! and mark the report as sampled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lattice::{greedy_predecessor_counted, Lattice, State, TIE_EPS};

#[derive(Clone, Debug)]
pub struct CheckBudget {
    /// Largest number of ordered pairs checked exhaustively.
    pub max_pairs: u64,
    /// Pairs drawn when the exhaustive check does not fit.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckBudget {
    fn default() -> Self {
        CheckBudget {
            max_pairs: 4_000_000,
            samples: 200_000,
            seed: 0,
        }
    }
}

impl CheckBudget {
    /// A small sampled-only budget, used as a preprocessing sanity check.
    pub fn sanity(seed: u64) -> Self {
        CheckBudget {
            max_pairs: 0,
            samples: 2_000,
            seed,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub name: String,
    pub violations: Vec<(State, State)>,
    pub pairs_checked: u64,
    pub sampled: bool,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn for_each_pair<L, F>(domain: &L, budget: &CheckBudget, mut f: F) -> (u64, bool)
where
    L: Lattice + ?Sized,
    F: FnMut(&State, &State),
{
    let region = domain.goal_region();
    let n = region.len();
    let exhaustive = n.saturating_mul(n) <= budget.max_pairs;
    if exhaustive {
        let states = region.states(u64::MAX).expect("unbounded enumeration");
        let mut count = 0;
        for a in &states {
            for b in &states {
                if a != b {
                    f(a, b);
                    count += 1;
                }
            }
        }
        (count, false)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        let mut count = 0;
        for _ in 0..budget.samples {
            let a = region.sample(&mut rng);
            let b = region.sample(&mut rng);
            if a != b {
                f(&a, &b);
                count += 1;
            }
        }
        (count, true)
    }
}

/// For every distinct pair `(s1, s2)` of goal states, some predecessor of `s1`
/// must be no farther from `s2` than `s1` itself.
pub fn check_weak_monotonicity<L: Lattice + ?Sized>(
    domain: &L,
    budget: &CheckBudget,
) -> AssumptionReport {
    let mut violations = Vec::new();
    let (pairs_checked, sampled) = for_each_pair(domain, budget, |a, b| {
        let h_here = domain.heuristic(a, b);
        let best = domain
            .preds(a)
            .iter()
            .map(|p| domain.heuristic(p, b))
            .fold(f64::INFINITY, f64::min);
        if best > h_here + TIE_EPS {
            violations.push((a.clone(), b.clone()));
        }
    });
    AssumptionReport {
        name: "weak_monotonicity".into(),
        violations,
        pairs_checked,
        sampled,
    }
}

/// For every distinct pair `(s1, s2)` of goal states, the greedy predecessor of
/// `s1` towards `s2` must stay inside the goal region.
pub fn check_goal_convexity<L: Lattice + ?Sized>(
    domain: &L,
    budget: &CheckBudget,
) -> AssumptionReport {
    let region = domain.goal_region();
    let mut violations = Vec::new();
    let (pairs_checked, sampled) = for_each_pair(domain, budget, |a, b| {
        match greedy_predecessor_counted(domain, a, b) {
            Some((p, _)) if region.contains(&p) => {}
            _ => violations.push((a.clone(), b.clone())),
        }
    });
    AssumptionReport {
        name: "goal_convexity".into(),
        violations,
        pairs_checked,
        sampled,
    }
}

/// Sampled check that the tie-break order is antisymmetric, transitive and
/// total on goal-region states.
pub fn check_tie_break_order<L: Lattice + ?Sized>(
    domain: &L,
    samples: usize,
    seed: u64,
) -> AssumptionReport {
    let region = domain.goal_region();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..samples {
        let a = region.sample(&mut rng);
        let b = region.sample(&mut rng);
        let c = region.sample(&mut rng);
        let total = (a < b) as u8 + (b < a) as u8 + (a == b) as u8 == 1;
        let antisym = !(a <= b && b <= a) || a == b;
        let trans = !(a <= b && b <= c) || a <= c;
        if !(total && antisym && trans) {
            violations.push((a, b));
        }
    }
    AssumptionReport {
        name: "tie_break_order".into(),
        violations,
        pairs_checked: samples as u64,
        sampled: true,
    }
}
