//! Simulated trainers that advise on individual states.

use std::collections::BTreeSet;

use rand::Rng;

use super::oracle::Oracle;
use super::profile::{AdviceKind, Reliability};
use crate::advice::{Rule, RuleError};
use crate::case::Case;
use crate::env::{ActionId, StateId};

#[derive(Debug, Clone)]
pub struct StateUser {
    pub kind: AdviceKind,
    pub reliability: Reliability,
    pub region: Rule,
    pub oracle: Oracle,
    /// Size of an evaluation.
    pub magnitude: f64,
    action_count: usize,
    advised_states: BTreeSet<StateId>,
    advised_pairs: BTreeSet<(StateId, ActionId)>,
}

impl StateUser {
    pub fn new(
        kind: AdviceKind,
        reliability: Reliability,
        region: Rule,
        oracle: Oracle,
        magnitude: f64,
        action_count: usize,
    ) -> Self {
        StateUser {
            kind,
            reliability,
            region,
            oracle,
            magnitude,
            action_count,
            advised_states: BTreeSet::new(),
            advised_pairs: BTreeSet::new(),
        }
    }

    /// Availability, then knowledge region, then the oracle's opinion.
    fn willing<R: Rng + ?Sized>(&self, case: &Case, rng: &mut R) -> Result<Option<ActionId>, RuleError> {
        if !roll(self.reliability.availability, rng) {
            return Ok(None);
        }
        if !self.region.eval(case)? {
            return Ok(None);
        }
        self.oracle.action(case)
    }

    /// Recommends an action for `case`. A persistent agent is never advised
    /// twice on the same state.
    pub fn advise_action<R: Rng + ?Sized>(
        &mut self,
        case: &Case,
        s: StateId,
        persistent: bool,
        rng: &mut R,
    ) -> Result<Option<ActionId>, RuleError> {
        if persistent && self.advised_states.contains(&s) {
            return Ok(None);
        }
        let Some(best) = self.willing(case, rng)? else {
            return Ok(None);
        };
        let action = if roll(self.reliability.accuracy, rng) || self.action_count < 2 {
            best
        } else {
            let k = rng.random_range(0..self.action_count - 1);
            ActionId(if k >= best.0 { k + 1 } else { k })
        };
        if persistent {
            self.advised_states.insert(s);
        }
        Ok(Some(action))
    }

    /// Judges the action just taken in `case`: `+magnitude` when it matches
    /// the oracle, `-magnitude` otherwise, flipped when the trainer errs.
    pub fn advise_evaluation<R: Rng + ?Sized>(
        &mut self,
        case: &Case,
        s: StateId,
        taken: ActionId,
        persistent: bool,
        rng: &mut R,
    ) -> Result<Option<f64>, RuleError> {
        if persistent && self.advised_pairs.contains(&(s, taken)) {
            return Ok(None);
        }
        let Some(best) = self.willing(case, rng)? else {
            return Ok(None);
        };
        let mut positive = taken == best;
        if !roll(self.reliability.accuracy, rng) {
            positive = !positive;
        }
        if persistent {
            self.advised_pairs.insert((s, taken));
        }
        Ok(Some(if positive { self.magnitude } else { -self.magnitude }))
    }
}

/// Bernoulli draw that consumes no randomness when the outcome is certain.
fn roll<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    if p >= 1.0 {
        true
    } else if p <= 0.0 {
        false
    } else {
        rng.random::<f64>() < p
    }
}
