//! Persistent, rule-based interactive reinforcement learning.
//!
//! Tabular Q-learning agents that keep the advice a trainer gives them, either
//! as per-state lookups or as a ripple-down-rules exception tree, and replay it
//! through probabilistic policy reuse. Trainers are either simulated (for batch
//! experiments) or a live human connected through [`service`].
//!
//! Module map:
//!
//! - [`env`]: mountain-car and self-driving-car simulators.
//! - [`rl`]: Q-table, ε-greedy and the policy-reuse selector.
//! - [`advice`]: rule DSL, ripple-down-rules tree and advice stores.
//! - [`users`]: simulated trainers and their knowledge bases.
//! - [`harness`]: experiment configuration, runner and metrics.
//! - [`service`]: live advising sessions over newline-delimited JSON.

pub mod advice;
pub mod case;
pub mod env;
pub mod harness;
pub mod rl;
pub mod rng;
pub mod service;
pub mod users;

pub use case::{Case, FeatureKind, FeatureValue, Schema};
pub use env::{ActionId, ActionSpace, EnvKind, Environment, StateId, Transition};
