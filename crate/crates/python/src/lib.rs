//! Python bindings: load or build a domain, preprocess its goal region,
//! answer queries, profile, audit and persist artifacts.

use std::time::Duration;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use goalcover::persist::{artifact_from_bytes, artifact_to_bytes, load_artifact_file, save_artifact_file};
use goalcover::{
    audit_artifact, check_goal_convexity, check_weak_monotonicity, compute_path, preprocess_region,
    profile_worst_case, scenes, AStar, CheckBudget, GridWorld, Lattice, PlanarArm, PreprocessConfig,
    PreprocessError, State,
};

create_exception!(pygoalcover, GoalcoverError, PyException, "Base class for goalcover data errors.");
create_exception!(pygoalcover, NotCoveredError, GoalcoverError, "No subregion covers the goal.");
create_exception!(pygoalcover, PlannerFailureError, GoalcoverError, "Some attractors could not be reached.");

fn err(category: &str, e: impl std::fmt::Display) -> PyErr {
    let msg = format!("{category}: {e}");
    match category {
        "NotCovered" => NotCoveredError::new_err(msg),
        "PlannerFailure" => PlannerFailureError::new_err(msg),
        _ => GoalcoverError::new_err(msg),
    }
}

fn coords(s: &State) -> Vec<i32> {
    s.coords().to_vec()
}

/// A grid world or planar arm scene.
#[pyclass(name = "Domain", module = "pygoalcover", frozen)]
struct PyDomain {
    inner: goalcover::Domain,
}

impl PyDomain {
    fn state(&self, c: Vec<i32>) -> PyResult<State> {
        if c.len() != self.inner.dimension() {
            return Err(PyValueError::new_err(format!(
                "expected {} coordinates, got {}",
                self.inner.dimension(),
                c.len()
            )));
        }
        Ok(State::new(c))
    }
}

#[pymethods]
impl PyDomain {
    /// Read a grid map, or an arm scene when the path ends in `.toml`.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = goalcover::Domain::load(path).map_err(|e| err(e.category(), &e))?;
        Ok(PyDomain { inner })
    }

    #[staticmethod]
    fn from_map(text: &str) -> PyResult<Self> {
        let g = GridWorld::from_map_str(text).map_err(|e| err(e.category(), &e))?;
        Ok(PyDomain { inner: g.into() })
    }

    #[staticmethod]
    fn from_arm_toml(text: &str) -> PyResult<Self> {
        let a = PlanarArm::from_toml_str(text).map_err(|e| err(e.category(), &e))?;
        Ok(PyDomain { inner: a.into() })
    }

    /// One of the built-in fixtures: empty_box, wall_split, random_grid,
    /// corridor, two_box, blocked_goal, arm.
    #[staticmethod]
    #[pyo3(signature = (name, seed = 0))]
    fn scene(name: &str, seed: u64) -> PyResult<Self> {
        let inner: goalcover::Domain = match name {
            "empty_box" => scenes::empty_box().into(),
            "wall_split" => scenes::wall_split().into(),
            "random_grid" => scenes::random_grid(seed).into(),
            "corridor" => scenes::corridor().into(),
            "two_box" => scenes::two_box_goal().into(),
            "blocked_goal" => scenes::blocked_goal().into(),
            "arm" => scenes::arm_scene(seed).into(),
            other => return Err(PyValueError::new_err(format!("unknown scene {other:?}"))),
        };
        Ok(PyDomain { inner })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn start(&self) -> Option<Vec<i32>> {
        self.inner.default_start().as_ref().map(coords)
    }

    #[getter]
    fn fingerprint(&self) -> u64 {
        self.inner.fingerprint()
    }

    /// Validity calls made on this domain so far.
    #[getter]
    fn validity_checks(&self) -> u64 {
        self.inner.validity_checks()
    }

    fn is_valid(&self, state: Vec<i32>) -> PyResult<bool> {
        let s = self.state(state)?;
        Ok(self.inner.contains(&s) && self.inner.is_valid(&s))
    }

    fn goal_contains(&self, state: Vec<i32>) -> PyResult<bool> {
        let s = self.state(state)?;
        Ok(self.inner.goal_region().contains(&s))
    }

    /// Exhaustive (or sampled, above `max_pairs`) assumption checks.
    /// Returns `{name: number_of_violations}`.
    #[pyo3(signature = (max_pairs = 4_000_000, samples = 200_000, seed = 0))]
    fn check_assumptions<'py>(
        &self,
        py: Python<'py>,
        max_pairs: u64,
        samples: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let budget = CheckBudget {
            max_pairs,
            samples,
            seed,
        };
        let d = PyDict::new(py);
        for r in [
            check_weak_monotonicity(&self.inner, &budget),
            check_goal_convexity(&self.inner, &budget),
        ] {
            d.set_item(r.name.clone(), r.violations.len())?;
        }
        Ok(d)
    }

    /// Cover the goal region. `timeouts` are offline planner timeouts per
    /// tier, in seconds.
    #[pyo3(signature = (start = None, seed = 0, timeouts = vec![10.0, 60.0], allow_incomplete = false))]
    fn preprocess(
        &self,
        start: Option<Vec<i32>>,
        seed: u64,
        timeouts: Vec<f64>,
        allow_incomplete: bool,
    ) -> PyResult<PyArtifact> {
        let start = match start {
            Some(c) => self.state(c)?,
            None => self
                .inner
                .default_start()
                .ok_or_else(|| PyValueError::new_err("no start given and the domain has none"))?,
        };
        let timeout_schedule = timeouts
            .iter()
            .map(|&s| Duration::try_from_secs_f64(s).map_err(|e| PyValueError::new_err(e.to_string())))
            .collect::<PyResult<Vec<_>>>()?;
        let config = PreprocessConfig {
            timeout_schedule,
            seed,
            ..Default::default()
        };
        match preprocess_region(&self.inner, &start, &AStar, &config) {
            Ok(a) => Ok(PyArtifact { inner: a }),
            Err(PreprocessError::PlannerFailure { artifact, .. }) if allow_incomplete => {
                Ok(PyArtifact { inner: *artifact })
            }
            Err(e) => Err(err(e.category(), &e)),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Domain(kind={:?}, dimension={}, fingerprint={:016x})",
            self.inner.kind(),
            self.inner.dimension(),
            self.inner.fingerprint()
        )
    }
}

/// Subregions, path library and statistics produced by preprocessing.
#[pyclass(name = "Artifact", module = "pygoalcover", frozen)]
struct PyArtifact {
    inner: goalcover::PreprocessArtifact,
}

#[pymethods]
impl PyArtifact {
    /// Answer `goal`. Returns `(path, stats)`; the path is a list of
    /// coordinate lists from the start to the goal.
    fn query<'py>(
        &self,
        py: Python<'py>,
        domain: &PyDomain,
        goal: Vec<i32>,
    ) -> PyResult<(Vec<Vec<i32>>, Bound<'py, PyDict>)> {
        let goal = domain.state(goal)?;
        let (path, stats) = compute_path(&goal, &self.inner, &domain.inner).map_err(|e| err(e.category(), &e))?;
        let d = PyDict::new(py);
        d.set_item("cost", path.cost)?;
        d.set_item("subregion_scans", stats.subregion_scans)?;
        d.set_item("greedy_expansions", stats.greedy_expansions)?;
        d.set_item("predecessor_evaluations", stats.predecessor_evaluations)?;
        d.set_item("collision_checks", stats.collision_checks)?;
        d.set_item("wall_time_s", stats.wall_time.as_secs_f64())?;
        Ok((path.states.iter().map(coords).collect(), d))
    }

    /// Query every valid goal state and return the worst case.
    #[pyo3(signature = (domain, budget = 1_000_000))]
    fn profile<'py>(&self, py: Python<'py>, domain: &PyDomain, budget: u64) -> PyResult<Bound<'py, PyDict>> {
        let w = profile_worst_case(&self.inner, &domain.inner, budget).map_err(|e| err(e.category(), &e))?;
        let d = PyDict::new(py);
        d.set_item("queries", w.queries)?;
        d.set_item("max_ops", w.max_ops)?;
        d.set_item("ops_bound", w.ops_bound)?;
        d.set_item("max_wall_time_s", w.max_wall_time.as_secs_f64())?;
        d.set_item("max_collision_checks", w.max_collision_checks)?;
        d.set_item("violations", w.violations.len())?;
        d.set_item("holds", w.holds())?;
        Ok(d)
    }

    /// Coverage, reachable-set and walk audit. Performs collision checks.
    #[pyo3(signature = (domain, budget = 1_000_000))]
    fn audit<'py>(&self, py: Python<'py>, domain: &PyDomain, budget: u64) -> PyResult<Bound<'py, PyDict>> {
        let a = audit_artifact(&self.inner, &domain.inner, budget).map_err(|e| err("LatticeError", e))?;
        let d = PyDict::new(py);
        d.set_item("goal_states", a.goal_states)?;
        d.set_item("uncovered", a.uncovered.len())?;
        d.set_item("reachability_mismatches", a.reachability_mismatches.len())?;
        d.set_item("walk_failures", a.walk_failures.len())?;
        d.set_item("holds", a.holds())?;
        Ok(d)
    }

    /// `(attractor, radius, depth)` per subregion, in query order.
    #[getter]
    fn subregions(&self) -> Vec<(Vec<i32>, f64, u32)> {
        self.inner
            .subregions
            .iter()
            .map(|r| (coords(&r.attractor), r.radius, r.depth))
            .collect()
    }

    #[getter]
    fn start(&self) -> Vec<i32> {
        coords(&self.inner.start)
    }

    #[getter]
    fn is_complete(&self) -> bool {
        self.inner.is_complete()
    }

    #[getter]
    fn max_depth(&self) -> u32 {
        self.inner.max_depth()
    }

    #[getter]
    fn preprocess_seconds(&self) -> f64 {
        self.inner.stats.preprocess_seconds
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_artifact_file(&self.inner, path).map_err(|e| err(e.category(), &e))
    }

    #[staticmethod]
    fn load(path: &str, domain: &PyDomain) -> PyResult<Self> {
        let inner = load_artifact_file(path, &domain.inner).map_err(|e| err(e.category(), &e))?;
        Ok(PyArtifact { inner })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &artifact_to_bytes(&self.inner))
    }

    /// Parse bytes without a domain; use `load` to also check the fingerprint.
    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let inner = artifact_from_bytes(data).map_err(|e| err(e.category(), &e))?;
        Ok(PyArtifact { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.subregions.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Artifact(subregions={}, max_depth={}, complete={})",
            self.inner.subregions.len(),
            self.inner.max_depth(),
            self.inner.is_complete()
        )
    }
}

#[pymodule]
fn pygoalcover(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_class::<PyArtifact>()?;
    m.add("GoalcoverError", m.py().get_type::<GoalcoverError>())?;
    m.add("NotCoveredError", m.py().get_type::<NotCoveredError>())?;
    m.add("PlannerFailureError", m.py().get_type::<PlannerFailureError>())?;
    Ok(())
}
