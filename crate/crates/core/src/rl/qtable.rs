use std::io::Write;

use super::{LearningParams, RlError};
use crate::env::{ActionId, StateId};

/// Dense `states × actions` table of action values, zero-initialised.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    states: usize,
    actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(states: usize, actions: usize) -> Self {
        QTable {
            states,
            actions,
            values: vec![0.0; states * actions],
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check(&self, s: StateId, a: ActionId) -> Result<usize, RlError> {
        if s.0 >= self.states {
            return Err(RlError::StateOutOfRange { state: s.0, states: self.states });
        }
        if a.0 >= self.actions {
            return Err(RlError::ActionOutOfRange { action: a.0, actions: self.actions });
        }
        Ok(s.0 * self.actions + a.0)
    }

    pub fn get(&self, s: StateId, a: ActionId) -> Result<f64, RlError> {
        Ok(self.values[self.check(s, a)?])
    }

    pub fn set(&mut self, s: StateId, a: ActionId, value: f64) -> Result<(), RlError> {
        let i = self.check(s, a)?;
        self.values[i] = value;
        Ok(())
    }

    pub fn row(&self, s: StateId) -> Result<&[f64], RlError> {
        if s.0 >= self.states {
            return Err(RlError::StateOutOfRange { state: s.0, states: self.states });
        }
        Ok(&self.values[s.0 * self.actions..(s.0 + 1) * self.actions])
    }

    pub fn max(&self, s: StateId) -> Result<f64, RlError> {
        Ok(self.row(s)?.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// All actions attaining the row maximum, in index order.
    pub fn argmax_set(&self, s: StateId) -> Result<Vec<ActionId>, RlError> {
        let row = self.row(s)?;
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(row
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == best)
            .map(|(a, _)| ActionId(a))
            .collect())
    }

    /// One-step Q-learning backup. `next = None` marks a terminal transition,
    /// which contributes no bootstrap. Returns the new value.
    pub fn update(
        &mut self,
        s: StateId,
        a: ActionId,
        reward: f64,
        next: Option<StateId>,
        params: &LearningParams,
    ) -> Result<f64, RlError> {
        if !reward.is_finite() {
            return Err(RlError::NonFiniteReward(reward));
        }
        let i = self.check(s, a)?;
        let bootstrap = match next {
            Some(n) => self.max(n)?,
            None => 0.0,
        };
        let old = self.values[i];
        let new = old + params.alpha * (reward + params.gamma * bootstrap - old);
        self.values[i] = new;
        Ok(new)
    }

    /// `state_id,action,value` rows in table order.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["state_id", "action", "value"])?;
        for s in 0..self.states {
            for a in 0..self.actions {
                let v = self.values[s * self.actions + a];
                writer.write_record([s.to_string(), a.to_string(), v.to_string()])?;
            }
        }
        writer.flush()?;
        Ok(())
    }
}
