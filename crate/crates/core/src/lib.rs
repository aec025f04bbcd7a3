//! Goal-region preprocessing for bounded-time planning queries.
//!
//! Offline, [`preprocess_region`] splits the goal region of a state lattice
//! into subregions centred on attractor states and plans one path from a
//! fixed start to each attractor. Online, [`compute_path`] answers any valid
//! goal in the region by a greedy walk to the covering attractor followed by
//! the stored path, without a single collision check.
//!
//! ```
//! use goalcover::{compute_path, preprocess_region, scenes, AStar, PreprocessConfig, State};
//!
//! let grid = scenes::empty_box();
//! let start = State::new(vec![0, 0]);
//! let artifact = preprocess_region(&grid, &start, &AStar, &PreprocessConfig::default()).unwrap();
//! let (path, stats) = compute_path(&State::new(vec![9, 5]), &artifact, &grid).unwrap();
//! assert_eq!(path.first(), Some(&start));
//! assert_eq!(stats.collision_checks, 0);
//! ```

pub mod assumptions;
pub mod audit;
pub mod bench;
pub mod domains;
pub mod error;
pub mod lattice;
pub mod path;
pub mod persist;
pub mod planners;
pub mod preprocess;
pub mod query;
pub mod scenes;

pub use assumptions::{check_goal_convexity, check_tie_break_order, check_weak_monotonicity, AssumptionReport, CheckBudget};
pub use audit::{audit_artifact, ArtifactAudit};
pub use domains::{Domain, GridWorld, PlanarArm};
pub use error::{DomainError, LatticeError, PersistError, PlanError, PreprocessError, QueryError};
pub use lattice::{greedy_predecessor, Connectivity, GoalBox, GoalRegion, Lattice, State};
pub use path::{audit_path, PlannedPath};
pub use planners::{AStar, OfflinePlanner, RrtConnect};
pub use preprocess::{
    compute_reachability, find_valid_uncovered_state, preprocess_region, prune_redundant, PreprocessArtifact,
    PreprocessConfig, Subregion,
};
pub use query::{compute_path, find_covering_subregion, find_greedy_path, profile_worst_case, QueryStats};
