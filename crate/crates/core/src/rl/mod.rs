//! Tabular learning: the Q-table, ε-greedy and the policy-reuse selector.

pub mod ppr;
pub mod qtable;
pub mod selection;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ppr::{DecayKind, PprConfig, PprMode, PprState};
pub use qtable::QTable;
pub use selection::{epsilon_greedy, greedy, ppr_select, ActionChoice, ActionSource};

#[derive(Debug, Error, PartialEq)]
pub enum RlError {
    #[error("state {state} is outside a table of {states} states")]
    StateOutOfRange { state: usize, states: usize },
    #[error("action {action} is outside a table of {actions} actions")]
    ActionOutOfRange { action: usize, actions: usize },
    #[error("reward {0} is not finite")]
    NonFiniteReward(f64),
    #[error("invalid learning parameters: {0}")]
    InvalidParams(String),
}

/// Learning rate, discount and exploration rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl LearningParams {
    pub const MOUNTAIN_CAR: LearningParams = LearningParams {
        alpha: 0.25,
        gamma: 0.9,
        epsilon: 0.1,
    };

    pub const DRIVING: LearningParams = LearningParams {
        alpha: 0.1,
        gamma: 0.999,
        epsilon: 0.01,
    };

    pub fn validate(&self) -> Result<(), RlError> {
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return Err(RlError::InvalidParams(format!("alpha {} not in [0, 1]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(RlError::InvalidParams(format!("gamma {} not in [0, 1]", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(RlError::InvalidParams(format!("epsilon {} not in [0, 1]", self.epsilon)));
        }
        Ok(())
    }
}
