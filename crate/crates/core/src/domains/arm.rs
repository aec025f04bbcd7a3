use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::lattice::{Connectivity, GoalBox, GoalRegion, Lattice, State, WeightedEuclidean};

use super::Fingerprinter;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Convex polygon. Vertex winding may be either direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

fn default_interpolation() -> usize {
    4
}

fn default_connectivity() -> Connectivity {
    Connectivity::Axis
}

/// Arm scene file contents (TOML).
///
/// ```toml
/// links = [1.0, 0.8, 0.6]            # meters
/// base = [0.0, 0.0]
/// resolution_deg = [10.0, 10.0, 10.0] # degrees per lattice step
/// limits = [[-9, 9], [-12, 12], [-12, 12]]  # joint limits in steps
/// connectivity = "axis"              # or "full"
/// interpolation = 4                  # sweep points checked per edge
///
/// [[goal]]
/// lower = [2, -3, -3]
/// upper = [6, 3, 3]
///
/// [[circles]]
/// center = [1.2, 1.0]
/// radius = 0.25
///
/// [[polygons]]
/// vertices = [[-1.0, -1.2], [1.0, -1.2], [1.0, -1.0], [-1.0, -1.0]]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub links: Vec<f64>,
    #[serde(default)]
    pub base: [f64; 2],
    pub resolution_deg: Vec<f64>,
    pub limits: Vec<[i32; 2]>,
    #[serde(default = "default_connectivity")]
    pub connectivity: Connectivity,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_interpolation")]
    pub interpolation: usize,
    pub goal: Vec<GoalBox>,
    #[serde(default)]
    pub start: Option<Vec<i32>>,
    #[serde(default)]
    pub circles: Vec<Circle>,
    #[serde(default)]
    pub polygons: Vec<Polygon>,
}

/// A planar serial arm with revolute joints, planned over a lattice of joint
/// steps. Joint `i` is relative to link `i - 1`; joints do not wrap.
#[derive(Debug)]
pub struct PlanarArm {
    config: ArmConfig,
    goal: GoalRegion,
    primitives: Vec<Vec<i32>>,
    metric: WeightedEuclidean,
    step_rad: Vec<f64>,
    fingerprint: u64,
    checks: AtomicU64,
}

impl Clone for PlanarArm {
    fn clone(&self) -> Self {
        PlanarArm {
            config: self.config.clone(),
            goal: self.goal.clone(),
            primitives: self.primitives.clone(),
            metric: self.metric.clone(),
            step_rad: self.step_rad.clone(),
            fingerprint: self.fingerprint,
            checks: AtomicU64::new(0),
        }
    }
}

impl PlanarArm {
    pub fn new(mut config: ArmConfig) -> Result<Self, DomainError> {
        let k = config.links.len();
        if k == 0 {
            return Err(DomainError::Config("arm needs at least one link".into()));
        }
        if config.links.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(DomainError::Config("link lengths must be positive".into()));
        }
        let weights = config.weights.clone().unwrap_or_else(|| vec![1.0; k]);
        for (what, len) in [
            ("resolution_deg", config.resolution_deg.len()),
            ("limits", config.limits.len()),
            ("weights", weights.len()),
        ] {
            if len != k {
                return Err(DomainError::InconsistentDims(format!(
                    "{what} has {len} entries for {k} links"
                )));
            }
        }
        if config.resolution_deg.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(DomainError::Config("joint resolution must be positive".into()));
        }
        if config.limits.iter().any(|[lo, hi]| lo > hi) {
            return Err(DomainError::Config("joint limits are inverted".into()));
        }
        if config.goal.iter().any(|b| b.lower.len() != k || b.upper.len() != k) {
            return Err(DomainError::InconsistentDims("goal box dimension differs from link count".into()));
        }
        if let Some(s) = &config.start {
            if s.len() != k {
                return Err(DomainError::InconsistentDims("start dimension differs from link count".into()));
            }
        }
        for poly in &mut config.polygons {
            if poly.vertices.len() < 3 {
                return Err(DomainError::Config("polygons need at least three vertices".into()));
            }
            if signed_area(&poly.vertices) < 0.0 {
                poly.vertices.reverse();
            }
        }
        let goal = GoalRegion::union(config.goal.iter().map(|b| GoalBox::new(b.lower.clone(), b.upper.clone())).collect::<Result<_, _>>()?)?;
        let metric = WeightedEuclidean::new(weights)?;
        let step_rad = config.resolution_deg.iter().map(|d| d.to_radians()).collect();
        let mut arm = PlanarArm {
            primitives: config.connectivity.primitives(k),
            goal,
            metric,
            step_rad,
            config,
            fingerprint: 0,
            checks: AtomicU64::new(0),
        };
        arm.fingerprint = arm.compute_fingerprint();
        Ok(arm)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, DomainError> {
        let config: ArmConfig = toml::from_str(text).map_err(|e| DomainError::Parse {
            line: e
                .span()
                .map(|sp| text[..sp.start].lines().count().max(1))
                .unwrap_or(0),
            msg: e.message().to_string(),
        })?;
        Self::new(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.config).expect("arm config serializes")
    }

    fn compute_fingerprint(&self) -> u64 {
        let c = &self.config;
        let mut fp = Fingerprinter::new("planar-arm");
        fp.tag("links").floats(&c.links);
        fp.tag("base").floats(&c.base);
        fp.tag("resolution").floats(&c.resolution_deg);
        fp.tag("limits");
        for l in &c.limits {
            fp.ints(l);
        }
        fp.tag("primitives");
        for p in &self.primitives {
            fp.ints(p);
        }
        fp.tag("weights").floats(self.metric.weights());
        fp.tag("interpolation").ints(&[c.interpolation as i32]);
        fp.tag("goal");
        for b in self.goal.boxes() {
            fp.ints(&b.lower).ints(&b.upper);
        }
        fp.tag("circles");
        for o in &c.circles {
            fp.floats(&[o.center[0], o.center[1], o.radius]);
        }
        fp.tag("polygons");
        for p in &c.polygons {
            let flat: Vec<f64> = p.vertices.iter().flatten().copied().collect();
            fp.floats(&flat);
        }
        fp.finish()
    }

    pub fn config(&self) -> &ArmConfig {
        &self.config
    }

    pub fn start(&self) -> Option<State> {
        self.config.start.clone().map(State::new)
    }

    pub fn link_count(&self) -> usize {
        self.config.links.len()
    }

    /// Joint angles in radians for a lattice state.
    pub fn angles(&self, s: &State) -> Vec<f64> {
        s.coords()
            .iter()
            .zip(&self.step_rad)
            .map(|(&c, r)| f64::from(c) * r)
            .collect()
    }

    /// Joint positions `p_0 = base, ..., p_k = end effector` for joint angles
    /// in radians.
    pub fn forward_kinematics(&self, angles: &[f64]) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(angles.len() + 1);
        let mut p = self.config.base;
        let mut heading = 0.0;
        pts.push(p);
        for (theta, len) in angles.iter().zip(&self.config.links) {
            heading += theta;
            p = [p[0] + len * heading.cos(), p[1] + len * heading.sin()];
            pts.push(p);
        }
        pts
    }

    fn within_limits(&self, s: &State) -> bool {
        s.dim() == self.config.limits.len()
            && s
                .coords()
                .iter()
                .zip(&self.config.limits)
                .all(|(c, [lo, hi])| lo <= c && c <= hi)
    }

    /// Collision test of a continuous configuration, uncounted.
    pub fn collides(&self, angles: &[f64]) -> bool {
        let pts = self.forward_kinematics(angles);
        pts.windows(2).any(|seg| {
            let (a, b) = (seg[0], seg[1]);
            self.config
                .circles
                .iter()
                .any(|c| point_segment_distance(c.center, a, b) <= c.radius)
                || self
                    .config
                    .polygons
                    .iter()
                    .any(|p| segment_hits_convex(a, b, &p.vertices))
        })
    }

    /// Validity with a dimension check.
    pub fn arm_validity(&self, s: &State) -> Result<bool, DomainError> {
        if s.dim() != self.dimension() {
            return Err(crate::error::LatticeError::DimensionMismatch {
                expected: self.dimension(),
                got: s.dim(),
            }
            .into());
        }
        Ok(self.is_valid(s))
    }

    /// Edge validity with a neighbour check.
    pub fn edge_validity(&self, a: &State, b: &State) -> Result<bool, DomainError> {
        if !self.are_neighbors(a, b) {
            return Err(DomainError::NotNeighbors(a.clone(), b.clone()));
        }
        Ok(self.is_edge_valid(a, b))
    }

    /// Sweep check between two configurations at `points` interior samples,
    /// endpoints excluded. Endpoint order is canonicalized so the result is
    /// symmetric.
    pub fn sweep_is_free(&self, a: &State, b: &State, points: usize) -> bool {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let qa = self.angles(a);
        let qb = self.angles(b);
        let mut q = vec![0.0; qa.len()];
        (1..=points).all(|i| {
            let t = i as f64 / (points + 1) as f64;
            for k in 0..q.len() {
                q[k] = qa[k] + t * (qb[k] - qa[k]);
            }
            !self.collides(&q)
        })
    }
}

impl Lattice for PlanarArm {
    fn dimension(&self) -> usize {
        self.config.links.len()
    }

    fn primitives(&self) -> &[Vec<i32>] {
        &self.primitives
    }

    fn goal_region(&self) -> &GoalRegion {
        &self.goal
    }

    fn contains(&self, s: &State) -> bool {
        self.within_limits(s)
    }

    fn lattice_bounds(&self) -> (Vec<i32>, Vec<i32>) {
        (
            self.config.limits.iter().map(|l| l[0]).collect(),
            self.config.limits.iter().map(|l| l[1]).collect(),
        )
    }

    fn heuristic(&self, a: &State, b: &State) -> f64 {
        self.metric.distance(a, b)
    }

    fn is_valid(&self, s: &State) -> bool {
        self.checks.fetch_add(1, Ordering::Relaxed);
        self.within_limits(s) && !self.collides(&self.angles(s))
    }

    fn is_edge_valid(&self, a: &State, b: &State) -> bool {
        if !(self.is_valid(a) && self.is_valid(b)) {
            return false;
        }
        self.checks.fetch_add(1, Ordering::Relaxed);
        self.sweep_is_free(a, b, self.config.interpolation)
    }

    fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn validity_checks(&self) -> u64 {
        self.checks.load(Ordering::Relaxed)
    }
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

pub(crate) fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

/// Point inside or on a counter-clockwise convex polygon.
fn inside_convex(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], p) >= 0.0)
}

fn segment_hits_convex(a: [f64; 2], b: [f64; 2], poly: &[[f64; 2]]) -> bool {
    if inside_convex(a, poly) || inside_convex(b, poly) {
        return true;
    }
    let n = poly.len();
    (0..n).any(|i| segments_intersect(a, b, poly[i], poly[(i + 1) % n]))
}
