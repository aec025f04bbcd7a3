use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lattice::{Lattice, State};

/// An ordered lattice path and its cost (sum of `h` over consecutive states).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedPath {
    pub states: Vec<State>,
    pub cost: f64,
}

impl PlannedPath {
    pub fn from_states<L: Lattice + ?Sized>(states: Vec<State>, domain: &L) -> Self {
        let cost = path_cost(&states, domain);
        PlannedPath { states, cost }
    }

    pub fn single(s: State) -> Self {
        PlannedPath {
            states: vec![s],
            cost: 0.0,
        }
    }

    pub fn first(&self) -> Option<&State> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The same path traversed backwards (for example goal back to start).
    pub fn reversed(&self) -> Self {
        let mut states = self.states.clone();
        states.reverse();
        PlannedPath {
            states,
            cost: self.cost,
        }
    }

    /// Append `tail`, which must start where `self` ends; the shared state is
    /// kept once.
    pub fn splice(mut self, tail: &PlannedPath) -> Self {
        debug_assert_eq!(self.states.last(), tail.states.first());
        self.states.extend(tail.states.iter().skip(1).cloned());
        self.cost += tail.cost;
        self
    }

    /// One state per line, coordinates separated by single spaces.
    pub fn to_path_file(&self) -> String {
        let mut out = String::new();
        for s in &self.states {
            let coords: Vec<String> = s.coords().iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "{}", coords.join(" "));
        }
        out
    }

    /// Parse the path file format. Cost is recomputed from the domain.
    pub fn from_path_file<L: Lattice + ?Sized>(text: &str, domain: &L) -> Result<Self, String> {
        let mut states = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let coords: Result<Vec<i32>, _> = line.split_whitespace().map(str::parse).collect();
            let coords = coords.map_err(|e| format!("line {}: {e}", n + 1))?;
            states.push(State::new(coords));
        }
        Ok(PlannedPath::from_states(states, domain))
    }

    pub fn write_path_file(&self, path: impl AsRef<Path>) -> io::Result<()> {
        std::fs::write(path, self.to_path_file())
    }
}

pub fn path_cost<L: Lattice + ?Sized>(states: &[State], domain: &L) -> f64 {
    states
        .windows(2)
        .map(|w| domain.heuristic(&w[0], &w[1]))
        .sum()
}

/// Why a path failed an audit.
#[derive(Clone, Debug, PartialEq)]
pub enum AuditFailure {
    Empty,
    WrongStart { expected: State, got: State },
    WrongEnd { expected: State, got: State },
    NotNeighbors(usize),
    InvalidState(usize),
    InvalidEdge(usize),
    CostMismatch { stored: f64, recomputed: f64 },
}

/// Independent re-validation of a path: endpoints, lattice adjacency, every
/// state and every edge, and the stored cost. Never used on the query path.
pub fn audit_path<L: Lattice + ?Sized>(
    domain: &L,
    path: &PlannedPath,
    start: &State,
    goal: &State,
) -> Result<(), AuditFailure> {
    let (Some(first), Some(last)) = (path.first(), path.last()) else {
        return Err(AuditFailure::Empty);
    };
    if first != start {
        return Err(AuditFailure::WrongStart {
            expected: start.clone(),
            got: first.clone(),
        });
    }
    if last != goal {
        return Err(AuditFailure::WrongEnd {
            expected: goal.clone(),
            got: last.clone(),
        });
    }
    for (i, s) in path.states.iter().enumerate() {
        if !domain.is_valid(s) {
            return Err(AuditFailure::InvalidState(i));
        }
    }
    for (i, w) in path.states.windows(2).enumerate() {
        if !domain.are_neighbors(&w[0], &w[1]) {
            return Err(AuditFailure::NotNeighbors(i));
        }
        if !domain.is_edge_valid(&w[0], &w[1]) {
            return Err(AuditFailure::InvalidEdge(i));
        }
    }
    let recomputed = path_cost(&path.states, domain);
    if (recomputed - path.cost).abs() > 1e-9 * (1.0 + recomputed.abs()) {
        return Err(AuditFailure::CostMismatch {
            stored: path.cost,
            recomputed,
        });
    }
    Ok(())
}
