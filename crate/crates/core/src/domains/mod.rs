//! Concrete lattices: n-dimensional occupancy grids and a planar k-link arm
//! over a joint-angle lattice.

mod arm;
mod grid;

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::DomainError;
use crate::lattice::{GoalRegion, Lattice, State};

pub use arm::{ArmConfig, Circle, PlanarArm, Polygon};
pub use grid::{GridConfig, GridWorld, MAP_FORMAT_VERSION};

/// Accumulates canonical bytes of a domain description into a stable
/// 64-bit fingerprint (first eight bytes of a SHA-256 digest, little endian).
pub(crate) struct Fingerprinter(Sha256);

impl Fingerprinter {
    pub fn new(kind: &str) -> Self {
        let mut h = Sha256::new();
        h.update((kind.len() as u32).to_le_bytes());
        h.update(kind.as_bytes());
        Fingerprinter(h)
    }

    pub fn tag(&mut self, tag: &str) -> &mut Self {
        self.0.update((tag.len() as u32).to_le_bytes());
        self.0.update(tag.as_bytes());
        self
    }

    pub fn ints(&mut self, v: &[i32]) -> &mut Self {
        self.0.update((v.len() as u32).to_le_bytes());
        for x in v {
            self.0.update(x.to_le_bytes());
        }
        self
    }

    pub fn floats(&mut self, v: &[f64]) -> &mut Self {
        self.0.update((v.len() as u32).to_le_bytes());
        for x in v {
            self.0.update(x.to_bits().to_le_bytes());
        }
        self
    }

    pub fn finish(self) -> u64 {
        let digest = self.0.finalize();
        let mut b = [0u8; 8];
        b.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(b)
    }
}

/// Either concrete domain, for tools that pick the kind from a file.
#[derive(Clone, Debug)]
pub enum Domain {
    Grid(GridWorld),
    Arm(PlanarArm),
}

impl Domain {
    /// `.toml` files are arm scenes; anything else is read as a grid map.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DomainError> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e == "toml") {
            Ok(Domain::Arm(PlanarArm::load(path)?))
        } else {
            Ok(Domain::Grid(GridWorld::load(path)?))
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Domain::Grid(_) => "grid",
            Domain::Arm(_) => "arm",
        }
    }

    /// Start state given in the domain file, if any.
    pub fn default_start(&self) -> Option<State> {
        match self {
            Domain::Grid(g) => g.start().cloned(),
            Domain::Arm(a) => a.start(),
        }
    }

    fn inner(&self) -> &dyn Lattice {
        match self {
            Domain::Grid(g) => g,
            Domain::Arm(a) => a,
        }
    }
}

impl From<GridWorld> for Domain {
    fn from(g: GridWorld) -> Self {
        Domain::Grid(g)
    }
}

impl From<PlanarArm> for Domain {
    fn from(a: PlanarArm) -> Self {
        Domain::Arm(a)
    }
}

impl Lattice for Domain {
    fn dimension(&self) -> usize {
        self.inner().dimension()
    }
    fn primitives(&self) -> &[Vec<i32>] {
        self.inner().primitives()
    }
    fn goal_region(&self) -> &GoalRegion {
        self.inner().goal_region()
    }
    fn contains(&self, s: &State) -> bool {
        self.inner().contains(s)
    }
    fn lattice_bounds(&self) -> (Vec<i32>, Vec<i32>) {
        self.inner().lattice_bounds()
    }
    fn heuristic(&self, a: &State, b: &State) -> f64 {
        self.inner().heuristic(a, b)
    }
    fn is_valid(&self, s: &State) -> bool {
        self.inner().is_valid(s)
    }
    fn is_edge_valid(&self, a: &State, b: &State) -> bool {
        self.inner().is_edge_valid(a, b)
    }
    fn fingerprint(&self) -> u64 {
        self.inner().fingerprint()
    }
    fn validity_checks(&self) -> u64 {
        self.inner().validity_checks()
    }
}
