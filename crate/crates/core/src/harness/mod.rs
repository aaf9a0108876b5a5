//! Batch experiments: configuration, the episode loop, and metrics output.

pub mod agent;
pub mod combos;
pub mod config;
pub mod episode;
pub mod experiment;
pub mod metrics;

use std::path::PathBuf;

use thiserror::Error;

use crate::advice::{RdrError, RuleError};
use crate::env::EnvError;
use crate::rl::RlError;

pub use agent::{Agent, AgentKind, Retained};
pub use config::{Config, ConfigError, UserKind};
pub use episode::{run_episode, EpisodeStats, RunRngs, Trainer};
pub use experiment::{run_experiment, run_one, EpisodeMetrics, RunOutcome, Summary, Totals};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Rdr(#[from] RdrError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Incompatible(&'static str),
    #[error("cannot start worker threads: {0}")]
    Pool(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
}
