//! The learning agent: a Q-table plus whatever advice it retains.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::advice::{
    Classification, CornerstoneIndex, EvalAdviceStore, NodeId, RdrError, RdrTree, Rule, RuleError,
    StateAdviceStore,
};
use crate::advice::format::to_json_node;
use crate::case::Case;
use crate::env::{ActionId, ActionSpace, StateId};
use crate::rl::{ppr_select, ActionChoice, LearningParams, PprConfig, PprState, QTable, RlError};
use crate::users::AdviceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    /// Unassisted Q-learning.
    Uql,
    /// Non-persistent evaluative: evaluations shape one update, then vanish.
    Npe,
    /// Non-persistent informative: recommendations are followed once.
    Npi,
    /// Persistent evaluative: evaluations are stored per state-action pair.
    Pe,
    /// Persistent informative: recommendations are stored per state.
    Pi,
    /// Rule-based: advice arrives as rules in a ripple-down-rules tree.
    Rdr,
}

impl AgentKind {
    pub const ALL: [AgentKind; 6] = [
        AgentKind::Uql,
        AgentKind::Npe,
        AgentKind::Npi,
        AgentKind::Pe,
        AgentKind::Pi,
        AgentKind::Rdr,
    ];

    pub fn code(self) -> &'static str {
        match self {
            AgentKind::Uql => "UQL",
            AgentKind::Npe => "NPE",
            AgentKind::Npi => "NPI",
            AgentKind::Pe => "PE",
            AgentKind::Pi => "PI",
            AgentKind::Rdr => "RDR",
        }
    }

    pub fn persistent(self) -> bool {
        matches!(self, AgentKind::Pe | AgentKind::Pi | AgentKind::Rdr)
    }

    /// The kind of state-based advice this agent accepts, if any.
    pub fn advice_kind(self) -> Option<AdviceKind> {
        match self {
            AgentKind::Npe | AgentKind::Pe => Some(AdviceKind::Evaluative),
            AgentKind::Npi | AgentKind::Pi => Some(AdviceKind::Informative),
            AgentKind::Uql | AgentKind::Rdr => None,
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown agent kind `{s}`"))
    }
}

/// What the agent's memory suggests for the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct Retained {
    pub action: Option<ActionId>,
    /// Where a new rule for this case would go (rule-based agents only).
    pub classification: Option<Classification>,
}

impl Retained {
    pub const NONE: Retained = Retained {
        action: None,
        classification: None,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    kind: AgentKind,
    params: LearningParams,
    q: QTable,
    ppr: PprState,
    recommendations: StateAdviceStore,
    evaluations: EvalAdviceStore,
    cornerstones: CornerstoneIndex,
    tree: RdrTree,
}

impl Agent {
    pub fn new(
        kind: AgentKind,
        states: usize,
        actions: usize,
        params: LearningParams,
        ppr: &PprConfig,
    ) -> Self {
        Agent {
            kind,
            params,
            q: QTable::new(states, actions),
            ppr: ppr.initial_state(),
            recommendations: StateAdviceStore::new(),
            evaluations: EvalAdviceStore::new(),
            cornerstones: CornerstoneIndex::default(),
            tree: RdrTree::new(),
        }
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn params(&self) -> &LearningParams {
        &self.params
    }

    pub fn q(&self) -> &QTable {
        &self.q
    }

    pub fn ppr(&self) -> &PprState {
        &self.ppr
    }

    pub fn tree(&self) -> &RdrTree {
        &self.tree
    }

    pub fn recommendations(&self) -> &StateAdviceStore {
        &self.recommendations
    }

    pub fn evaluations(&self) -> &EvalAdviceStore {
        &self.evaluations
    }

    /// Whether the agent needs the case view of each state.
    pub fn reads_cases(&self) -> bool {
        self.kind == AgentKind::Rdr
    }

    pub fn retained(&self, s: StateId, case: Option<&Case>) -> Result<Retained, RuleError> {
        match self.kind {
            AgentKind::Pi => Ok(Retained {
                action: self.recommendations.recall(s),
                classification: None,
            }),
            AgentKind::Rdr => {
                let case = case.expect("rule-based agents are given cases");
                let c = self.tree.classify(case)?;
                Ok(Retained {
                    action: c.conclusion.action(),
                    classification: Some(c),
                })
            }
            _ => Ok(Retained::NONE),
        }
    }

    /// The cornerstone behind a retained recommendation for `s`.
    pub fn cornerstone(&self, s: StateId, retained: &Retained) -> Option<&Case> {
        match (self.kind, retained.classification) {
            (AgentKind::Rdr, Some(c)) if retained.action.is_some() => {
                self.tree.node(c.classification_node).ok()?.cornerstone.as_ref()
            }
            (AgentKind::Pi, _) if retained.action.is_some() => self.cornerstones.get(s),
            _ => None,
        }
    }

    pub fn choose<R: Rng + ?Sized>(
        &self,
        s: StateId,
        retained: &Retained,
        fresh: Option<ActionId>,
        rng: &mut R,
    ) -> Result<ActionChoice, RlError> {
        ppr_select(&self.q, s, retained.action, fresh, self.params.epsilon, &self.ppr, rng)
    }

    /// Keeps a recommendation if this agent retains them.
    pub fn accept_recommendation(&mut self, s: StateId, case: Option<&Case>, action: ActionId) -> bool {
        if self.kind != AgentKind::Pi {
            return false;
        }
        let stored = self.recommendations.store(s, action);
        if stored {
            if let Some(case) = case {
                self.cornerstones.record(s, case.clone());
            }
        }
        stored
    }

    pub fn accept_rule(
        &mut self,
        insertion_node: NodeId,
        rule: Rule,
        action: ActionId,
        case: Case,
    ) -> Result<NodeId, RdrError> {
        self.tree.insert(insertion_node, rule, action, case)
    }

    /// A stored evaluation for `(s, a)`, replayed with the reuse probability.
    pub fn replay_evaluation<R: Rng + ?Sized>(&self, s: StateId, a: ActionId, rng: &mut R) -> Option<f64> {
        if self.kind != AgentKind::Pe {
            return None;
        }
        let stored = self.evaluations.recall(s, a)?;
        self.ppr.roll(rng).then_some(stored)
    }

    pub fn has_evaluation(&self, s: StateId, a: ActionId) -> bool {
        self.evaluations.contains(s, a)
    }

    pub fn accept_evaluation(&mut self, s: StateId, a: ActionId, reward: f64) -> bool {
        self.kind == AgentKind::Pe && self.evaluations.store(s, a, reward)
    }

    pub fn learn(&mut self, s: StateId, a: ActionId, reward: f64, next: Option<StateId>) -> Result<f64, RlError> {
        self.q.update(s, a, reward, next, &self.params)
    }

    pub fn end_episode(&mut self) {
        self.ppr.decay();
    }

    /// Everything the agent has retained from its trainer, as JSON. Two agents
    /// given the same advice produce the same text.
    pub fn advice_json(&self, actions: &ActionSpace) -> String {
        let state = serde_json::json!({
            "tree": to_json_node(&self.tree, actions),
            "recommendations": self.recommendations,
            "evaluations": self.evaluations.iter().map(|((s, a), r)| (s.0, a.0, r)).collect::<Vec<_>>(),
        });
        serde_json::to_string(&state).expect("advice serializes")
    }
}
