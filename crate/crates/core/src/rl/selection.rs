//! Action selection: ε-greedy and the advice-aware policy-reuse selector.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{PprState, QTable, RlError};
use crate::env::{ActionId, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSource {
    FreshAdvice,
    RetainedAdvice,
    Greedy,
    Random,
}

impl ActionSource {
    pub fn is_advice(self) -> bool {
        matches!(self, ActionSource::FreshAdvice | ActionSource::RetainedAdvice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionChoice {
    pub action: ActionId,
    pub source: ActionSource,
}

/// Greedy action with uniform tie-breaking among maximisers.
pub fn greedy<R: Rng + ?Sized>(q: &QTable, s: StateId, rng: &mut R) -> Result<ActionId, RlError> {
    let best = q.argmax_set(s)?;
    if best.len() == 1 {
        return Ok(best[0]);
    }
    Ok(*best.choose(rng).expect("a row has at least one action"))
}

pub fn epsilon_greedy<R: Rng + ?Sized>(
    q: &QTable,
    s: StateId,
    epsilon: f64,
    rng: &mut R,
) -> Result<ActionChoice, RlError> {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        q.row(s)?;
        return Ok(ActionChoice {
            action: ActionId(rng.random_range(0..q.actions())),
            source: ActionSource::Random,
        });
    }
    Ok(ActionChoice {
        action: greedy(q, s, rng)?,
        source: ActionSource::Greedy,
    })
}

/// Fresh advice always wins; retained advice is followed with probability
/// `p_reuse`; otherwise the agent falls back to ε-greedy.
pub fn ppr_select<R: Rng + ?Sized>(
    q: &QTable,
    s: StateId,
    retained: Option<ActionId>,
    fresh: Option<ActionId>,
    epsilon: f64,
    ppr: &PprState,
    rng: &mut R,
) -> Result<ActionChoice, RlError> {
    if let Some(action) = fresh {
        return Ok(ActionChoice {
            action,
            source: ActionSource::FreshAdvice,
        });
    }
    if let Some(action) = retained {
        if ppr.roll(rng) {
            return Ok(ActionChoice {
                action,
                source: ActionSource::RetainedAdvice,
            });
        }
    }
    epsilon_greedy(q, s, epsilon, rng)
}
