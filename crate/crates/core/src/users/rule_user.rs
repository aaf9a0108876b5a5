//! Simulated trainer holding its own rule tree.

use std::collections::BTreeSet;

use crate::advice::{Conclusion, NodeId, RdrTree, Rule, RuleError};
use crate::case::Case;
use crate::env::ActionId;

/// A rule handed to the agent, with the trainer-side node it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleAdvice {
    pub rule: Rule,
    pub action: ActionId,
    pub node: NodeId,
}

#[derive(Debug, Clone)]
pub struct RuleUser {
    model: RdrTree,
    delivered: BTreeSet<NodeId>,
}

impl RuleUser {
    pub fn new(model: RdrTree) -> Self {
        RuleUser {
            model,
            delivered: BTreeSet::new(),
        }
    }

    pub fn model(&self) -> &RdrTree {
        &self.model
    }

    pub fn delivered(&self) -> &BTreeSet<NodeId> {
        &self.delivered
    }

    /// Speaks up when its own tree recommends something other than what the
    /// agent intends, and the rule behind it has not been handed over yet.
    pub fn advise(&mut self, case: &Case, intended: ActionId) -> Result<Option<RuleAdvice>, RuleError> {
        let c = self.model.classify(case)?;
        let Conclusion::Recommend(action) = c.conclusion else {
            return Ok(None);
        };
        if action == intended || self.delivered.contains(&c.classification_node) {
            return Ok(None);
        }
        self.delivered.insert(c.classification_node);
        let rule = self
            .model
            .node(c.classification_node)
            .expect("classification returns tree nodes")
            .rule
            .clone();
        Ok(Some(RuleAdvice {
            rule,
            action,
            node: c.classification_node,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::mountain_car::McAction;
    use crate::users::kb::KnowledgeBase;

    #[test]
    fn full_user_hands_over_the_velocity_rule_once() {
        let mut user = RuleUser::new(KnowledgeBase::McFull.tree());
        let case = Case::new().with("position", -0.5).with("velocity", 0.02);
        let advice = user.advise(&case, McAction::Left.id()).unwrap().unwrap();
        assert_eq!(advice.rule.to_string(), "velocity > 0");
        assert_eq!(advice.action, McAction::Right.id());
        assert_eq!(user.advise(&case, McAction::Left.id()).unwrap(), None);
    }

    #[test]
    fn agreement_needs_no_advice() {
        let mut user = RuleUser::new(KnowledgeBase::McFull.tree());
        let case = Case::new().with("position", -0.5).with("velocity", -0.02);
        assert_eq!(user.advise(&case, McAction::Left.id()).unwrap(), None);
        assert!(user.delivered().is_empty());
    }
}
