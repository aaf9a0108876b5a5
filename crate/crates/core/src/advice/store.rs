//! Write-once lookup stores for state-based advice.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::case::Case;
use crate::env::{ActionId, StateId};

/// Retained action recommendations, one per state. The first advice for a
/// state wins.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateAdviceStore {
    entries: BTreeMap<StateId, ActionId>,
}

impl StateAdviceStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns whether the advice was stored.
    pub fn store(&mut self, s: StateId, a: ActionId) -> bool {
        match self.entries.entry(s) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(a);
                true
            }
            std::collections::btree_map::Entry::Occupied(_) => false,
        }
    }

    pub fn recall(&self, s: StateId) -> Option<ActionId> {
        self.entries.get(&s).copied()
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.entries.contains_key(&s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, ActionId)> + '_ {
        self.entries.iter().map(|(s, a)| (*s, *a))
    }
}

/// Retained evaluations, one signed reward per state-action pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalAdviceStore {
    entries: BTreeMap<(StateId, ActionId), f64>,
}

impl EvalAdviceStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn store(&mut self, s: StateId, a: ActionId, reward: f64) -> bool {
        match self.entries.entry((s, a)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(reward);
                true
            }
            std::collections::btree_map::Entry::Occupied(_) => false,
        }
    }

    pub fn recall(&self, s: StateId, a: ActionId) -> Option<f64> {
        self.entries.get(&(s, a)).copied()
    }

    pub fn contains(&self, s: StateId, a: ActionId) -> bool {
        self.entries.contains_key(&(s, a))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((StateId, ActionId), f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }
}

/// Cases at which state advice was first given, for showing trainers the
/// cornerstone behind a retained recommendation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CornerstoneIndex {
    cases: BTreeMap<StateId, Case>,
}

impl CornerstoneIndex {
    pub fn record(&mut self, s: StateId, case: Case) {
        self.cases.entry(s).or_insert(case);
    }

    pub fn get(&self, s: StateId) -> Option<&Case> {
        self.cases.get(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn informative_store_is_write_once() {
        let mut store = StateAdviceStore::new();
        assert_eq!(store.recall(StateId(3)), None);
        assert!(store.store(StateId(3), ActionId(2)));
        assert_eq!(store.recall(StateId(3)), Some(ActionId(2)));
        assert!(!store.store(StateId(3), ActionId(0)));
        assert_eq!(store.recall(StateId(3)), Some(ActionId(2)));
    }

    #[test]
    fn evaluative_store_is_keyed_by_pair() {
        let mut store = EvalAdviceStore::new();
        assert!(store.store(StateId(1), ActionId(0), 1.0));
        assert_eq!(store.recall(StateId(1), ActionId(0)), Some(1.0));
        assert_eq!(store.recall(StateId(1), ActionId(1)), None);
        assert!(!store.store(StateId(1), ActionId(0), -1.0));
        assert_eq!(store.recall(StateId(1), ActionId(0)), Some(1.0));
    }
}
