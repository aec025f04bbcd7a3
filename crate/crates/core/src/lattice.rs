//! The discretized configuration-space contract shared by every other module:
//! lattice states, motion primitives, the heuristic, the goal box and the
//! greedy predecessor rule.
//!
//! Preprocessing and queries must agree bit-for-bit on which predecessor is
//! "greedy", so both go through [`greedy_predecessor`] and nothing else.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::LatticeError;

/// Two heuristic values closer than this are considered equal and the
/// lexicographic state order decides.
pub const TIE_EPS: f64 = 1e-12;

/// One vertex of the lattice.
///
/// The derived `Ord` is lexicographic over the coordinates. It is the total
/// tie-break order used whenever two candidates have the same heuristic value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(Coords);

/// Coordinates stored inline up to eight dimensions.
type Coords = SmallVec<[i32; 8]>;

impl State {
    pub fn new(coords: Vec<i32>) -> Self {
        State(Coords::from_vec(coords))
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_coords(self) -> Vec<i32> {
        self.0.into_vec()
    }

    /// `self + offset`, component-wise.
    pub fn offset(&self, delta: &[i32]) -> State {
        State(self.0.iter().zip(delta).map(|(a, d)| a + d).collect())
    }

    /// `self - offset`, component-wise.
    pub fn offset_neg(&self, delta: &[i32]) -> State {
        State(self.0.iter().zip(delta).map(|(a, d)| a - d).collect())
    }
}

impl From<Vec<i32>> for State {
    fn from(v: Vec<i32>) -> Self {
        State(Coords::from_vec(v))
    }
}

impl From<&[i32]> for State {
    fn from(v: &[i32]) -> Self {
        State(Coords::from_slice(v))
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Compare two `(h, state)` candidates under the shared tie-break rule.
/// Returns true when the candidate should replace the incumbent.
#[inline]
pub fn prefer(h_cand: f64, cand: &State, h_best: f64, best: &State) -> bool {
    if h_cand < h_best - TIE_EPS {
        true
    } else if (h_cand - h_best).abs() <= TIE_EPS {
        cand < best
    } else {
        false
    }
}

/// Inclusive axis-aligned box of lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalBox {
    pub lower: Vec<i32>,
    pub upper: Vec<i32>,
}

impl GoalBox {
    pub fn new(lower: Vec<i32>, upper: Vec<i32>) -> Result<Self, LatticeError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(LatticeError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if let Some(axis) = (0..lower.len()).find(|&k| lower[k] > upper[k]) {
            return Err(LatticeError::EmptyGoalRegion { axis });
        }
        Ok(GoalBox { lower, upper })
    }

    pub fn contains(&self, s: &State) -> bool {
        s.dim() == self.lower.len()
            && s
                .coords()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(c, (lo, hi))| lo <= c && c <= hi)
    }

    pub fn len(&self) -> u64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo) as u64 + 1)
            .product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The goal region: an axis-aligned box, or (for assumption-checker
/// counterexamples) a union of boxes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalRegion {
    boxes: Vec<GoalBox>,
    bounds: GoalBox,
}

impl GoalRegion {
    pub fn new(lower: Vec<i32>, upper: Vec<i32>) -> Result<Self, LatticeError> {
        let b = GoalBox::new(lower, upper)?;
        Ok(GoalRegion {
            bounds: b.clone(),
            boxes: vec![b],
        })
    }

    pub fn union(boxes: Vec<GoalBox>) -> Result<Self, LatticeError> {
        let first = boxes.first().ok_or(LatticeError::EmptyGoalRegion { axis: 0 })?;
        let dim = first.lower.len();
        let mut lower = first.lower.clone();
        let mut upper = first.upper.clone();
        for b in &boxes {
            if b.lower.len() != dim {
                return Err(LatticeError::DimensionMismatch {
                    expected: dim,
                    got: b.lower.len(),
                });
            }
            for k in 0..dim {
                lower[k] = lower[k].min(b.lower[k]);
                upper[k] = upper[k].max(b.upper[k]);
            }
        }
        Ok(GoalRegion {
            bounds: GoalBox { lower, upper },
            boxes,
        })
    }

    pub fn boxes(&self) -> &[GoalBox] {
        &self.boxes
    }

    /// Lower corner of the bounding box.
    pub fn lower(&self) -> &[i32] {
        &self.bounds.lower
    }

    /// Upper corner of the bounding box.
    pub fn upper(&self) -> &[i32] {
        &self.bounds.upper
    }

    pub fn dim(&self) -> usize {
        self.bounds.lower.len()
    }

    pub fn is_box(&self) -> bool {
        self.boxes.len() == 1
    }

    pub fn contains(&self, s: &State) -> bool {
        self.boxes.iter().any(|b| b.contains(s))
    }

    /// Number of lattice states in the region.
    pub fn len(&self) -> u64 {
        if self.is_box() {
            self.bounds.len()
        } else {
            self.bounding_states().filter(|s| self.contains(s)).count() as u64
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn bounding_states(&self) -> impl Iterator<Item = State> + '_ {
        let lower = &self.bounds.lower;
        let upper = &self.bounds.upper;
        let mut cur = Some(lower.clone());
        std::iter::from_fn(move || {
            let out = cur.take()?;
            let mut next = out.clone();
            // odometer increment, last axis fastest
            let mut k = next.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                if next[k] < upper[k] {
                    next[k] += 1;
                    cur = Some(next);
                    break;
                }
                next[k] = lower[k];
            }
            Some(State(Coords::from_vec(out)))
        })
    }

    /// All states of the region in lexicographic order. Fails when the
    /// bounding box holds more than `budget` states.
    pub fn states(&self, budget: u64) -> Result<Vec<State>, LatticeError> {
        let n = self.bounds.len();
        if n > budget {
            return Err(LatticeError::BudgetExceeded { needed: n, budget });
        }
        Ok(self.bounding_states().filter(|s| self.contains(s)).collect())
    }

    /// Uniform sample from the region.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        loop {
            let s = State(
                self.bounds
                    .lower
                    .iter()
                    .zip(&self.bounds.upper)
                    .map(|(&lo, &hi)| rng.random_range(lo..=hi))
                    .collect(),
            );
            if self.contains(&s) {
                return s;
            }
        }
    }
}

/// Weighted Euclidean distance over integer coordinates:
/// `sqrt(sum_k (w_k * (a_k - b_k))^2)`. A metric for strictly positive weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedEuclidean {
    weights: Vec<f64>,
}

impl WeightedEuclidean {
    pub fn new(weights: Vec<f64>) -> Result<Self, LatticeError> {
        if let Some(axis) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(LatticeError::BadWeight { axis });
        }
        Ok(WeightedEuclidean { weights })
    }

    pub fn unit(dim: usize) -> Self {
        WeightedEuclidean {
            weights: vec![1.0; dim],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn distance(&self, a: &State, b: &State) -> f64 {
        a.coords()
            .iter()
            .zip(b.coords())
            .zip(&self.weights)
            .map(|((x, y), w)| {
                let d = w * f64::from(x - y);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Which offsets make up the primitive set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// `2n` unit steps along single axes.
    Axis,
    /// Every nonzero offset in `{-1, 0, 1}^n`.
    Full,
}

impl Connectivity {
    /// Primitive offsets in a fixed, documented order. Closed under negation.
    pub fn primitives(self, dim: usize) -> Vec<Vec<i32>> {
        match self {
            Connectivity::Axis => {
                let mut out = Vec::with_capacity(2 * dim);
                for k in 0..dim {
                    for sign in [-1, 1] {
                        let mut v = vec![0; dim];
                        v[k] = sign;
                        out.push(v);
                    }
                }
                out
            }
            Connectivity::Full => {
                let total = 3usize.pow(dim as u32);
                (0..total)
                    .map(|mut code| {
                        (0..dim)
                            .map(|_| {
                                let c = (code % 3) as i32 - 1;
                                code /= 3;
                                c
                            })
                            .rev()
                            .collect::<Vec<i32>>()
                    })
                    .filter(|v| v.iter().any(|&c| c != 0))
                    .collect()
            }
        }
    }
}

/// The world a planner runs in.
///
/// Implementations are immutable after construction (apart from the
/// instrumentation counter) and are shared read-only across threads.
pub trait Lattice: Send + Sync {
    fn dimension(&self) -> usize;

    /// Motion primitive offsets. `Succs(s) = { s + p }` and
    /// `Preds(s) = { s - p }`, both filtered to lattice vertices.
    fn primitives(&self) -> &[Vec<i32>];

    fn goal_region(&self) -> &GoalRegion;

    /// Whether `s` is a vertex of the lattice at all (extents, joint limits).
    /// Says nothing about collisions.
    fn contains(&self, s: &State) -> bool;

    /// Inclusive bounding box of all lattice vertices, used for sampling.
    fn lattice_bounds(&self) -> (Vec<i32>, Vec<i32>);

    fn heuristic(&self, a: &State, b: &State) -> f64;

    /// Collision test. Counts towards [`Lattice::validity_checks`].
    fn is_valid(&self, s: &State) -> bool;

    /// Validity of the motion between two neighbouring states.
    fn is_edge_valid(&self, a: &State, b: &State) -> bool;

    /// Stable 64-bit identity of the configuration and obstacle data.
    fn fingerprint(&self) -> u64;

    /// Number of state or edge validity evaluations performed so far.
    fn validity_checks(&self) -> u64;

    fn branching_factor(&self) -> usize {
        self.primitives().len()
    }

    fn succs(&self, s: &State) -> Vec<State> {
        self.primitives()
            .iter()
            .map(|p| s.offset(p))
            .filter(|n| self.contains(n))
            .collect()
    }

    fn preds(&self, s: &State) -> Vec<State> {
        self.primitives()
            .iter()
            .map(|p| s.offset_neg(p))
            .filter(|n| self.contains(n))
            .collect()
    }

    /// Whether `b` is one primitive step away from `a`.
    fn are_neighbors(&self, a: &State, b: &State) -> bool {
        a.dim() == b.dim()
            && self.primitives().iter().any(|p| {
                a.coords()
                    .iter()
                    .zip(b.coords())
                    .zip(p)
                    .all(|((x, y), d)| x + d == *y)
            })
    }
}

impl<L: Lattice + ?Sized> Lattice for &L {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn primitives(&self) -> &[Vec<i32>] {
        (**self).primitives()
    }
    fn goal_region(&self) -> &GoalRegion {
        (**self).goal_region()
    }
    fn contains(&self, s: &State) -> bool {
        (**self).contains(s)
    }
    fn lattice_bounds(&self) -> (Vec<i32>, Vec<i32>) {
        (**self).lattice_bounds()
    }
    fn heuristic(&self, a: &State, b: &State) -> f64 {
        (**self).heuristic(a, b)
    }
    fn is_valid(&self, s: &State) -> bool {
        (**self).is_valid(s)
    }
    fn is_edge_valid(&self, a: &State, b: &State) -> bool {
        (**self).is_edge_valid(a, b)
    }
    fn fingerprint(&self) -> u64 {
        (**self).fingerprint()
    }
    fn validity_checks(&self) -> u64 {
        (**self).validity_checks()
    }
}

/// Greedy predecessor plus the number of predecessors that were evaluated.
pub(crate) fn greedy_predecessor_counted<L: Lattice + ?Sized>(
    domain: &L,
    s: &State,
    target: &State,
) -> Option<(State, usize)> {
    let mut best: Option<(f64, State)> = None;
    let mut evaluated = 0;
    for p in domain.primitives() {
        let cand = s.offset_neg(p);
        if !domain.contains(&cand) {
            continue;
        }
        evaluated += 1;
        let h = domain.heuristic(&cand, target);
        match &best {
            Some((bh, bs)) if !prefer(h, &cand, *bh, bs) => {}
            _ => best = Some((h, cand)),
        }
    }
    best.map(|(_, s)| (s, evaluated))
}

/// The predecessor of `s` with minimal `h(., target)`; ties go to the
/// lexicographically smallest state.
pub fn greedy_predecessor<L: Lattice + ?Sized>(
    domain: &L,
    s: &State,
    target: &State,
) -> Result<State, LatticeError> {
    if s.dim() != domain.dimension() {
        return Err(LatticeError::DimensionMismatch {
            expected: domain.dimension(),
            got: s.dim(),
        });
    }
    greedy_predecessor_counted(domain, s, target)
        .map(|(p, _)| p)
        .ok_or_else(|| LatticeError::EmptyPredecessors(s.clone()))
}
