use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::DomainError;
use crate::lattice::{Connectivity, GoalBox, GoalRegion, Lattice, State, WeightedEuclidean};

use super::Fingerprinter;

pub const MAP_FORMAT_VERSION: u32 = 1;

/// Everything about a grid except its obstacles.
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub dims: Vec<i32>,
    pub connectivity: Connectivity,
    pub weights: Vec<f64>,
    /// Physical units per cell along each axis. Informational only.
    pub resolution: Vec<f64>,
    pub goal: GoalRegion,
    /// Default start for tools that read the map directly.
    pub start: Option<State>,
}

impl GridConfig {
    /// Unit weights and resolution.
    pub fn new(dims: Vec<i32>, connectivity: Connectivity, goal: GoalRegion) -> Self {
        let n = dims.len();
        GridConfig {
            dims,
            connectivity,
            weights: vec![1.0; n],
            resolution: vec![1.0; n],
            goal,
            start: None,
        }
    }
}

/// An n-dimensional occupancy grid. Cells are valid when in bounds and free.
#[derive(Debug)]
pub struct GridWorld {
    config: GridConfig,
    strides: Vec<usize>,
    occupied: Vec<bool>,
    primitives: Vec<Vec<i32>>,
    metric: WeightedEuclidean,
    fingerprint: u64,
    checks: AtomicU64,
}

impl Clone for GridWorld {
    fn clone(&self) -> Self {
        GridWorld {
            config: self.config.clone(),
            strides: self.strides.clone(),
            occupied: self.occupied.clone(),
            primitives: self.primitives.clone(),
            metric: self.metric.clone(),
            fingerprint: self.fingerprint,
            checks: AtomicU64::new(0),
        }
    }
}

impl GridWorld {
    pub fn new<I>(config: GridConfig, blocked: I) -> Result<Self, DomainError>
    where
        I: IntoIterator<Item = State>,
    {
        let dim = config.dims.len();
        if dim == 0 || config.dims.iter().any(|&d| d <= 0) {
            return Err(DomainError::InconsistentDims(format!(
                "grid extents must be positive, got {:?}",
                config.dims
            )));
        }
        for (what, len) in [
            ("weights", config.weights.len()),
            ("resolution", config.resolution.len()),
            ("goal", config.goal.dim()),
        ] {
            if len != dim {
                return Err(DomainError::InconsistentDims(format!(
                    "{what} has {len} axes, grid has {dim}"
                )));
            }
        }
        if let Some(s) = &config.start {
            if s.dim() != dim {
                return Err(DomainError::InconsistentDims(format!(
                    "start has {} axes, grid has {dim}",
                    s.dim()
                )));
            }
        }
        let metric = WeightedEuclidean::new(config.weights.clone())?;
        let mut strides = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * config.dims[k + 1] as usize;
        }
        let total: usize = config.dims.iter().map(|&d| d as usize).product();
        let mut world = GridWorld {
            primitives: config.connectivity.primitives(dim),
            config,
            strides,
            occupied: vec![false; total],
            metric,
            fingerprint: 0,
            checks: AtomicU64::new(0),
        };
        for cell in blocked {
            let idx = world.index(&cell).ok_or_else(|| {
                DomainError::InconsistentDims(format!("blocked cell {cell} outside the grid"))
            })?;
            world.occupied[idx] = true;
        }
        world.fingerprint = world.compute_fingerprint();
        Ok(world)
    }

    fn compute_fingerprint(&self) -> u64 {
        let mut fp = Fingerprinter::new("grid");
        fp.tag("dims").ints(&self.config.dims);
        fp.tag("primitives");
        for p in &self.primitives {
            fp.ints(p);
        }
        fp.tag("weights").floats(&self.config.weights);
        fp.tag("resolution").floats(&self.config.resolution);
        fp.tag("goal");
        for b in self.config.goal.boxes() {
            fp.ints(&b.lower).ints(&b.upper);
        }
        let blocked: Vec<i32> = self
            .occupied
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(i, _)| i as i32)
            .collect();
        fp.tag("occupied").ints(&blocked);
        fp.finish()
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn dims(&self) -> &[i32] {
        &self.config.dims
    }

    pub fn start(&self) -> Option<&State> {
        self.config.start.as_ref()
    }

    fn index(&self, s: &State) -> Option<usize> {
        if s.dim() != self.config.dims.len() {
            return None;
        }
        let mut idx = 0;
        for ((&c, &d), &stride) in s.coords().iter().zip(&self.config.dims).zip(&self.strides) {
            if c < 0 || c >= d {
                return None;
            }
            idx += c as usize * stride;
        }
        Some(idx)
    }

    fn state_at(&self, mut idx: usize) -> State {
        let coords = self
            .strides
            .iter()
            .map(|&stride| {
                let c = idx / stride;
                idx %= stride;
                c as i32
            })
            .collect();
        State::new(coords)
    }

    /// Occupancy without touching the collision counter.
    pub fn is_occupied(&self, s: &State) -> bool {
        self.index(s).is_none_or(|i| self.occupied[i])
    }

    /// Blocked cells in index order.
    pub fn occupied_cells(&self) -> Vec<State> {
        self.occupied
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(i, _)| self.state_at(i))
            .collect()
    }

    /// A copy with extra cells blocked.
    pub fn with_blocked<I: IntoIterator<Item = State>>(&self, extra: I) -> Result<Self, DomainError> {
        let cells = self.occupied_cells().into_iter().chain(extra);
        GridWorld::new(self.config.clone(), cells)
    }

    /// A copy with the given default start.
    pub fn with_start(&self, start: State) -> Result<Self, DomainError> {
        let mut config = self.config.clone();
        config.start = Some(start);
        GridWorld::new(config, self.occupied_cells())
    }

    /// Validity with a dimension check.
    pub fn grid_validity(&self, s: &State) -> Result<bool, DomainError> {
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

    /// Parse the text map format.
    ///
    /// ```text
    /// gridmap 1
    /// dims 20 10
    /// connectivity axis          # or full
    /// weights 1 1                # optional, default 1
    /// resolution 0.02 0.02       # optional, informational
    /// goal 2 2 17 7              # lower corner then upper corner; repeatable
    /// start 0 0                  # optional
    /// raster                     # 2-D only: one line per y, one char per x
    /// ....#...
    /// ```
    ///
    /// Instead of `raster`, a `cells` line may be followed by one blocked cell
    /// per line as whitespace-separated coordinates. In the raster `#` is
    /// blocked and `.` is free. Header lines may carry `#` comments; blank
    /// header lines are ignored. A map without a body has no obstacles.
    pub fn from_map_str(text: &str) -> Result<Self, DomainError> {
        let mut lines = text.lines().enumerate().peekable();
        let perr = |line: usize, msg: &str| DomainError::Parse {
            line: line + 1,
            msg: msg.to_string(),
        };

        let (n0, first) = loop {
            match lines.next() {
                Some((_, l)) if strip_comment(l).is_empty() => continue,
                Some((n, l)) => break (n, strip_comment(l)),
                None => return Err(perr(0, "empty map")),
            }
        };
        let mut it = first.split_whitespace();
        if it.next() != Some("gridmap") {
            return Err(perr(n0, "expected 'gridmap <version>' header"));
        }
        let version: u32 = it
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| perr(n0, "missing format version"))?;
        if version != MAP_FORMAT_VERSION {
            return Err(perr(n0, &format!("unsupported map version {version}")));
        }

        let mut dims: Option<Vec<i32>> = None;
        let mut connectivity = Connectivity::Axis;
        let mut weights = None;
        let mut resolution = None;
        let mut goals = Vec::new();
        let mut start = None;
        let mut body: Option<(usize, &str)> = None;

        for (n, raw) in lines.by_ref() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let key = words.next().unwrap_or_default();
            let rest: Vec<&str> = words.collect();
            match key {
                "dims" => dims = Some(parse_ints(&rest).ok_or_else(|| perr(n, "bad dims"))?),
                "connectivity" => {
                    connectivity = match rest.as_slice() {
                        ["axis"] | ["4"] => Connectivity::Axis,
                        ["full"] | ["8"] => Connectivity::Full,
                        _ => return Err(perr(n, "connectivity must be 'axis' or 'full'")),
                    }
                }
                "weights" => weights = Some(parse_floats(&rest).ok_or_else(|| perr(n, "bad weights"))?),
                "resolution" => {
                    resolution = Some(parse_floats(&rest).ok_or_else(|| perr(n, "bad resolution"))?)
                }
                "goal" => {
                    let v = parse_ints(&rest).ok_or_else(|| perr(n, "bad goal box"))?;
                    if v.is_empty() || v.len() % 2 != 0 {
                        return Err(perr(n, "goal needs lower and upper corners"));
                    }
                    let half = v.len() / 2;
                    let b = GoalBox::new(v[..half].to_vec(), v[half..].to_vec())
                        .map_err(|e| perr(n, &e.to_string()))?;
                    goals.push(b);
                }
                "start" => {
                    start = Some(State::new(parse_ints(&rest).ok_or_else(|| perr(n, "bad start"))?))
                }
                "raster" | "cells" => {
                    body = Some((n, key));
                    break;
                }
                other => return Err(perr(n, &format!("unknown header key '{other}'"))),
            }
        }

        let dims = dims.ok_or_else(|| perr(0, "missing 'dims'"))?;
        let dim = dims.len();
        if goals.is_empty() {
            return Err(perr(0, "missing 'goal'"));
        }
        if goals.iter().any(|g| g.lower.len() != dim) {
            return Err(DomainError::InconsistentDims(format!(
                "goal box dimension differs from dims ({dim})"
            )));
        }
        let goal = GoalRegion::union(goals)?;
        let mut config = GridConfig::new(dims.clone(), connectivity, goal);
        if let Some(w) = weights {
            config.weights = w;
        }
        if let Some(r) = resolution {
            config.resolution = r;
        }
        config.start = start;

        let mut blocked = Vec::new();
        match body {
            None => {}
            Some((n, "raster")) => {
                if dim != 2 {
                    return Err(DomainError::InconsistentDims(
                        "raster bodies are only defined for 2-D maps".into(),
                    ));
                }
                let rows: Vec<(usize, &str)> = lines.map(|(i, l)| (i, l.trim_end())).collect();
                let rows: Vec<(usize, &str)> = {
                    let mut r = rows;
                    while r.last().is_some_and(|(_, l)| l.is_empty()) {
                        r.pop();
                    }
                    r
                };
                if rows.len() != dims[1] as usize {
                    return Err(DomainError::InconsistentDims(format!(
                        "raster has {} rows, dims say {} (line {})",
                        rows.len(),
                        dims[1],
                        n + 1
                    )));
                }
                for (y, (ln, row)) in rows.iter().enumerate() {
                    if row.chars().count() != dims[0] as usize {
                        return Err(DomainError::InconsistentDims(format!(
                            "raster row at line {} has {} columns, dims say {}",
                            ln + 1,
                            row.chars().count(),
                            dims[0]
                        )));
                    }
                    for (x, ch) in row.chars().enumerate() {
                        match ch {
                            '#' => blocked.push(State::new(vec![x as i32, y as i32])),
                            '.' => {}
                            _ => return Err(perr(*ln, &format!("unexpected raster char '{ch}'"))),
                        }
                    }
                }
            }
            Some(_) => {
                for (n, raw) in lines {
                    let line = strip_comment(raw);
                    if line.is_empty() {
                        continue;
                    }
                    let words: Vec<&str> = line.split_whitespace().collect();
                    let v = parse_ints(&words).ok_or_else(|| perr(n, "bad cell"))?;
                    if v.len() != dim {
                        return Err(DomainError::InconsistentDims(format!(
                            "cell at line {} has {} coords, dims has {dim}",
                            n + 1,
                            v.len()
                        )));
                    }
                    blocked.push(State::new(v));
                }
            }
        }
        GridWorld::new(config, blocked)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_map_str(&text)
    }

    /// Serialize to the text map format. 2-D maps use a raster body.
    pub fn to_map_string(&self) -> String {
        let c = &self.config;
        let mut out = format!("gridmap {MAP_FORMAT_VERSION}\n");
        let join_i = |v: &[i32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let join_f = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "dims {}", join_i(&c.dims));
        let conn = match c.connectivity {
            Connectivity::Axis => "axis",
            Connectivity::Full => "full",
        };
        let _ = writeln!(out, "connectivity {conn}");
        let _ = writeln!(out, "weights {}", join_f(&c.weights));
        let _ = writeln!(out, "resolution {}", join_f(&c.resolution));
        for b in c.goal.boxes() {
            let _ = writeln!(out, "goal {} {}", join_i(&b.lower), join_i(&b.upper));
        }
        if let Some(s) = &c.start {
            let _ = writeln!(out, "start {}", join_i(s.coords()));
        }
        if c.dims.len() == 2 {
            out.push_str("raster\n");
            out.push_str(&self.render_ascii(false));
        } else {
            out.push_str("cells\n");
            for cell in self.occupied_cells() {
                let _ = writeln!(out, "{}", join_i(cell.coords()));
            }
        }
        out
    }

    /// Raster picture of a 2-D grid, optionally marking the goal box with `g`.
    pub fn render_ascii(&self, mark_goal: bool) -> String {
        let mut out = String::new();
        if self.config.dims.len() != 2 {
            return out;
        }
        for y in 0..self.config.dims[1] {
            for x in 0..self.config.dims[0] {
                let s = State::new(vec![x, y]);
                let ch = if self.is_occupied(&s) {
                    '#'
                } else if mark_goal && self.config.goal.contains(&s) {
                    'g'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or_default().trim()
}

fn parse_ints(words: &[&str]) -> Option<Vec<i32>> {
    words.iter().map(|w| w.parse().ok()).collect()
}

fn parse_floats(words: &[&str]) -> Option<Vec<f64>> {
    words.iter().map(|w| w.parse().ok()).collect()
}

impl Lattice for GridWorld {
    fn dimension(&self) -> usize {
        self.config.dims.len()
    }

    fn primitives(&self) -> &[Vec<i32>] {
        &self.primitives
    }

    fn goal_region(&self) -> &GoalRegion {
        &self.config.goal
    }

    fn contains(&self, s: &State) -> bool {
        self.index(s).is_some()
    }

    fn lattice_bounds(&self) -> (Vec<i32>, Vec<i32>) {
        let n = self.config.dims.len();
        (vec![0; n], self.config.dims.iter().map(|d| d - 1).collect())
    }

    fn heuristic(&self, a: &State, b: &State) -> f64 {
        self.metric.distance(a, b)
    }

    fn is_valid(&self, s: &State) -> bool {
        self.checks.fetch_add(1, Ordering::Relaxed);
        self.index(s).is_some_and(|i| !self.occupied[i])
    }

    fn is_edge_valid(&self, a: &State, b: &State) -> bool {
        self.is_valid(a) && self.is_valid(b)
    }

    fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn validity_checks(&self) -> u64 {
        self.checks.load(Ordering::Relaxed)
    }
}
