use std::io;

use thiserror::Error;

use crate::lattice::State;
use crate::preprocess::PreprocessArtifact;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("state has {got} coordinates, domain has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("goal box is empty along axis {axis}")]
    EmptyGoalRegion { axis: usize },
    #[error("heuristic weight on axis {axis} must be finite and positive")]
    BadWeight { axis: usize },
    #[error("enumeration needs {needed} items, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("state {0} has no predecessors")]
    EmptyPredecessors(State),
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("inconsistent dimensions: {0}")]
    InconsistentDims(String),
    #[error("{0} and {1} are not lattice neighbours")]
    NotNeighbors(State, State),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl DomainError {
    pub fn category(&self) -> &'static str {
        match self {
            DomainError::Parse { .. } => "ParseError",
            DomainError::InconsistentDims(_) => "InconsistentDims",
            DomainError::NotNeighbors(..) => "NotNeighbors",
            DomainError::Config(_) => "ConfigError",
            DomainError::Lattice(_) => "LatticeError",
            DomainError::Io(_) => "IoError",
        }
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("planner timed out")]
    Timeout,
    #[error("goal is not connected to start")]
    Disconnected,
    #[error("endpoint {0} is invalid")]
    InvalidEndpoint(State),
}

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("start state {0} is invalid")]
    StartInvalid(State),
    #[error("attractor {0} is invalid or outside the goal region")]
    InvalidAttractor(State),
    #[error("heuristic assumptions violated on {0} sampled pairs")]
    AssumptionViolated(usize),
    #[error("no path from start to {} attractor(s) after the last timeout tier", .orphans.len())]
    PlannerFailure {
        /// Incomplete artifact; the orphan attractors are not covered.
        artifact: Box<PreprocessArtifact>,
        orphans: Vec<State>,
    },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

impl PreprocessError {
    pub fn category(&self) -> &'static str {
        match self {
            PreprocessError::StartInvalid(_) => "StartInvalid",
            PreprocessError::InvalidAttractor(_) => "InvalidAttractor",
            PreprocessError::AssumptionViolated(_) => "AssumptionViolated",
            PreprocessError::PlannerFailure { .. } => "PlannerFailure",
            PreprocessError::Lattice(_) => "LatticeError",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("no subregion covers {0}")]
    NotCovered(State),
    #[error("greedy walk to {attractor} exceeded {budget} steps")]
    StepBudgetExceeded { attractor: State, budget: usize },
    #[error("artifact fingerprint {artifact:016x} does not match domain {domain:016x}")]
    FingerprintMismatch { artifact: u64, domain: u64 },
    #[error("library path {0} is missing")]
    MissingPath(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

impl QueryError {
    pub fn category(&self) -> &'static str {
        match self {
            QueryError::NotCovered(_) => "NotCovered",
            QueryError::StepBudgetExceeded { .. } => "StepBudgetExceeded",
            QueryError::FingerprintMismatch { .. } => "FingerprintMismatch",
            QueryError::MissingPath(_) => "MissingPath",
            QueryError::Lattice(_) => "LatticeError",
        }
    }
}

#[derive(Debug, Error)]
pub enum PersistError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not an artifact file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    VersionUnsupported(u16),
    #[error("checksum mismatch: stored {stored:016x}, computed {computed:016x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("fingerprint mismatch: file {file:016x}, domain {domain:016x}")]
    FingerprintMismatch { file: u64, domain: u64 },
    #[error("malformed file: {0}")]
    Malformed(String),
}

impl PersistError {
    pub fn category(&self) -> &'static str {
        match self {
            PersistError::Io(_) => "IoError",
            PersistError::BadMagic => "BadMagic",
            PersistError::VersionUnsupported(_) => "VersionUnsupported",
            PersistError::ChecksumMismatch { .. } => "ChecksumMismatch",
            PersistError::FingerprintMismatch { .. } => "FingerprintMismatch",
            PersistError::Malformed(_) => "Malformed",
        }
    }
}
