//! Python bindings: configuration, batch experiments, the rule language,
//! ripple-down-rules trees, the simulators and live sessions.
//!
//! Structured values (metrics rows, prompts, state updates, snapshots) cross
//! the boundary as plain dicts in the same shape as the wire protocol.

use std::path::PathBuf;

use advice_loop_core::advice::format::{from_json, from_text, to_json, to_text};
use advice_loop_core::advice::{parse_rule as parse, Conclusion, NodeId, Rule as CoreRule};
use advice_loop_core::env::driving::SdcObservation;
use advice_loop_core::env::mountain_car::{self, McAction, McState};
use advice_loop_core::harness::combos;
use advice_loop_core::harness::{self as core_harness, Config as CoreConfig, Totals};
use advice_loop_core::service::{self, Resolution, Session as CoreSession, SessionOptions};
use advice_loop_core::users::KnowledgeBase;
use advice_loop_core::{ActionId, ActionSpace, Case, EnvKind, FeatureValue, StateId};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict};
use serde::de::DeserializeOwned;
use serde::Serialize;

create_exception!(advice_loop, AdviceLoopError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    AdviceLoopError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = value.py().import("json")?.call_method1("dumps", (value,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn env_kind(name: &str) -> PyResult<EnvKind> {
    match name {
        "mountain-car" | "mc" => Ok(EnvKind::MountainCar),
        "self-driving-car" | "sdc" => Ok(EnvKind::SelfDrivingCar),
        _ => Err(PyValueError::new_err(format!("unknown environment `{name}`"))),
    }
}

fn case_from_dict(dict: &Bound<'_, PyDict>) -> PyResult<Case> {
    let mut case = Case::new();
    for (k, v) in dict.iter() {
        let name: String = k.extract()?;
        let value = if v.is_instance_of::<PyBool>() {
            FeatureValue::Bool(v.extract()?)
        } else {
            FeatureValue::Real(v.extract()?)
        };
        case.insert(&name, value);
    }
    Ok(case)
}

fn parse_action(actions: &ActionSpace, text: &str) -> PyResult<ActionId> {
    actions
        .parse(text)
        .ok_or_else(|| PyValueError::new_err(format!("unknown action `{text}`")))
}

/// Experiment configuration.
#[pyclass(module = "advice_loop", skip_from_py_object)]
#[derive(Clone)]
struct Config {
    inner: CoreConfig,
}

#[pymethods]
impl Config {
    #[new]
    fn new() -> Self {
        Config { inner: CoreConfig::default() }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let inner = CoreConfig::from_toml(text).map_err(PyValueError::new_err)?;
        inner.validate().map_err(err)?;
        Ok(Config { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Config {
            inner: CoreConfig::load(&path).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_dict(value: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner: CoreConfig = from_py(value)?;
        inner.validate().map_err(err)?;
        Ok(Config { inner })
    }

    /// A named agent/trainer pairing such as `PI-R` or `MCRDR-HALF`.
    #[staticmethod]
    fn combo(name: &str) -> PyResult<Self> {
        let inner = combos::apply(name, &CoreConfig::default()).map_err(PyValueError::new_err)?;
        Ok(Config { inner })
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    #[getter]
    fn runs(&self) -> usize {
        self.inner.experiment.runs
    }

    #[setter]
    fn set_runs(&mut self, runs: usize) {
        self.inner.experiment.runs = runs;
    }

    #[getter]
    fn episodes(&self) -> usize {
        self.inner.experiment.episodes
    }

    #[setter]
    fn set_episodes(&mut self, episodes: usize) {
        self.inner.experiment.episodes = episodes;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.experiment.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.inner.experiment.seed = seed;
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(agent={}, user={}, runs={}, episodes={}, seed={})",
            self.inner.agent.kind.code(),
            self.inner.user.label(),
            self.inner.experiment.runs,
            self.inner.experiment.episodes,
            self.inner.experiment.seed
        )
    }
}

/// Runs every run of `config` and returns one dict per episode.
#[pyfunction]
#[pyo3(signature = (config, parallel = 1))]
fn run_experiment<'py>(py: Python<'py>, config: &Config, parallel: usize) -> PyResult<Bound<'py, PyAny>> {
    let inner = config.inner.clone();
    let metrics = py
        .detach(move || core_harness::run_experiment(&inner, parallel))
        .map_err(err)?;
    to_py(py, &metrics)
}

/// Totals over metrics rows: runs, steps, interactions and interaction percentage.
#[pyfunction]
fn summarize<'py>(py: Python<'py>, rows: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyDict>> {
    let metrics: Vec<core_harness::EpisodeMetrics> = from_py(rows)?;
    let t = Totals::of(&metrics);
    let out = PyDict::new(py);
    out.set_item("runs", t.runs)?;
    out.set_item("steps", t.steps)?;
    out.set_item("interactions", t.interactions)?;
    out.set_item("retained_uses", t.retained_uses)?;
    out.set_item("interaction_pct", t.interaction_pct())?;
    out.set_item("interactions_per_run", t.interactions_per_run())?;
    Ok(out)
}

/// A parsed rule.
#[pyclass(module = "advice_loop", frozen)]
struct Rule {
    inner: CoreRule,
}

#[pymethods]
impl Rule {
    fn eval(&self, case: &Bound<'_, PyDict>) -> PyResult<bool> {
        self.inner.eval(&case_from_dict(case)?).map_err(err)
    }

    fn features(&self) -> Vec<String> {
        self.inner.predicates().map(|p| p.feature.clone()).collect()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Rule({:?})", self.inner.to_string())
    }

    fn __eq__(&self, other: &Rule) -> bool {
        self.inner == other.inner
    }
}

#[pyfunction]
fn parse_rule(text: &str) -> PyResult<Rule> {
    parse(text)
        .map(|inner| Rule { inner })
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Ripple-down-rules tree over one environment's actions.
#[pyclass(module = "advice_loop")]
struct RdrTree {
    inner: advice_loop_core::advice::RdrTree,
    actions: ActionSpace,
}

#[pymethods]
impl RdrTree {
    #[new]
    #[pyo3(signature = (env = "mountain-car"))]
    fn new(env: &str) -> PyResult<Self> {
        Ok(RdrTree {
            inner: advice_loop_core::advice::RdrTree::new(),
            actions: env_kind(env)?.actions(),
        })
    }

    /// A bundled knowledge base: `mc-full`, `mc-half`, `mc-quarter`, `mc-middle` or `sc-avoid`.
    #[staticmethod]
    fn knowledge_base(name: &str) -> PyResult<Self> {
        let kb: KnowledgeBase = serde_json::from_value(serde_json::Value::String(name.into()))
            .map_err(|_| PyValueError::new_err(format!("unknown knowledge base `{name}`")))?;
        Ok(RdrTree {
            inner: kb.tree(),
            actions: kb.env().actions(),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (text, env = "mountain-car"))]
    fn from_text(text: &str, env: &str) -> PyResult<Self> {
        let actions = env_kind(env)?.actions();
        Ok(RdrTree {
            inner: from_text(text, &actions).map_err(err)?,
            actions,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (text, env = "mountain-car"))]
    fn from_json(text: &str, env: &str) -> PyResult<Self> {
        let actions = env_kind(env)?.actions();
        Ok(RdrTree {
            inner: from_json(text, &actions).map_err(err)?,
            actions,
        })
    }

    fn to_text(&self) -> String {
        to_text(&self.inner, &self.actions)
    }

    fn to_json(&self) -> String {
        to_json(&self.inner, &self.actions)
    }

    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Returns `{conclusion, classification_node, insertion_node}`; the
    /// conclusion is an action label or `None` for exploration.
    fn classify<'py>(&self, py: Python<'py>, case: &Bound<'py, PyDict>) -> PyResult<Bound<'py, PyDict>> {
        let c = self.inner.classify(&case_from_dict(case)?).map_err(err)?;
        let out = PyDict::new(py);
        let conclusion = match c.conclusion {
            Conclusion::Explore => None,
            Conclusion::Recommend(a) => Some(self.actions.label(a)),
        };
        out.set_item("conclusion", conclusion)?;
        out.set_item("classification_node", c.classification_node.0)?;
        out.set_item("insertion_node", c.insertion_node.0)?;
        Ok(out)
    }

    /// Adds a rule learnt on `cornerstone` below `insertion_node` and returns the new node id.
    fn insert(
        &mut self,
        insertion_node: usize,
        rule: &str,
        action: &str,
        cornerstone: &Bound<'_, PyDict>,
    ) -> PyResult<usize> {
        let rule = parse(rule).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let action = parse_action(&self.actions, action)?;
        let case = case_from_dict(cornerstone)?;
        self.inner
            .insert(NodeId(insertion_node), rule, action, case)
            .map(|id| id.0)
            .map_err(err)
    }
}

/// One mountain-car transition: `(position, velocity, reward, terminal)`.
#[pyfunction]
fn mountain_car_step(position: f64, velocity: f64, action: &str) -> PyResult<(f64, f64, f64, bool)> {
    let a = parse_action(&ActionSpace::MOUNTAIN_CAR, action)?;
    let r = mountain_car::step(McState { position, velocity }, McAction::from_id(a).map_err(err)?);
    Ok((r.next.position, r.next.velocity, r.reward, r.terminal))
}

/// Discrete state index of a mountain-car state.
#[pyfunction]
#[pyo3(signature = (position, velocity, bins = 20))]
fn mountain_car_state(position: f64, velocity: f64, bins: usize) -> PyResult<usize> {
    mountain_car::discretize(McState { position, velocity }, bins)
        .map(|s| s.0)
        .map_err(err)
}

/// The case of a driving observation index.
#[pyfunction]
fn driving_case<'py>(py: Python<'py>, state: usize) -> PyResult<Bound<'py, PyAny>> {
    let obs = SdcObservation::decode(StateId(state)).map_err(err)?;
    to_py(py, &obs.case(&EnvKind::SelfDrivingCar.schema()))
}

/// A live advising session stepped from Python.
#[pyclass(module = "advice_loop", unsendable)]
struct Session {
    inner: CoreSession,
}

#[pymethods]
impl Session {
    /// `options` follows the `open` message: `{"prompt": {"policy": ...}, "timeout_ms": ..., "q_snapshots": ...}`.
    #[new]
    #[pyo3(signature = (config = None, options = None, id = "py"))]
    fn new(config: Option<&Config>, options: Option<&Bound<'_, PyAny>>, id: &str) -> PyResult<Self> {
        let config = config.map(|c| c.inner.clone()).unwrap_or_default();
        let options: SessionOptions = match options {
            Some(o) => from_py(o)?,
            None => SessionOptions::default(),
        };
        Ok(Session {
            inner: CoreSession::new(id, config, options).map_err(session_err)?,
        })
    }

    /// Reconstructs a session from an event log.
    #[staticmethod]
    fn replay(path: PathBuf) -> PyResult<Self> {
        Ok(Session {
            inner: service::replay_file(&path).map_err(err)?,
        })
    }

    #[getter]
    fn step(&self) -> u64 {
        self.inner.step_index()
    }

    #[getter]
    fn episode(&self) -> u64 {
        self.inner.episode()
    }

    #[getter]
    fn interactions(&self) -> u64 {
        self.inner.interactions()
    }

    fn opened<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.opened())
    }

    /// Prepares the next step and returns its prompt, or `None` when the
    /// prompt policy does not ask.
    fn prepare<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let prompt = self.inner.prepare().map_err(session_err)?;
        to_py(py, &prompt)
    }

    /// Settles the prepared step. `submission` is a `submit` payload;
    /// `None` lets the intended action run.
    #[pyo3(signature = (submission = None))]
    fn resolve<'py>(&mut self, py: Python<'py>, submission: Option<&Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let resolution = match submission {
            Some(s) => Resolution::Submit { submission: from_py(s)? },
            None => Resolution::Ignore,
        };
        let update = self.inner.resolve(&resolution).map_err(session_err)?;
        to_py(py, &update)
    }

    /// Runs `n` steps without advice and returns the last state update.
    fn run<'py>(&mut self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
        let mut last = None;
        for _ in 0..n {
            last = Some(self.inner.resolve(&Resolution::Ignore).map_err(session_err)?);
        }
        to_py(py, &last)
    }

    fn snapshot<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.snapshot())
    }
}

fn session_err(e: service::SessionError) -> PyErr {
    AdviceLoopError::new_err(format!("{}: {e}", e.code()))
}

#[pymodule]
fn advice_loop(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AdviceLoopError", m.py().get_type::<AdviceLoopError>())?;
    m.add_class::<Config>()?;
    m.add_class::<Rule>()?;
    m.add_class::<RdrTree>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(parse_rule, m)?)?;
    m.add_function(wrap_pyfunction!(mountain_car_step, m)?)?;
    m.add_function(wrap_pyfunction!(mountain_car_state, m)?)?;
    m.add_function(wrap_pyfunction!(driving_case, m)?)?;
    Ok(())
}
