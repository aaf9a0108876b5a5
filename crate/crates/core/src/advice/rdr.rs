//! Ripple-down-rules exception tree.
//!
//! Nodes live in an arena; node 0 is the root, which always fires and
//! concludes [`Conclusion::Explore`]. Classification walks from the root,
//! following the true child when a node's rule holds and the false child
//! otherwise. The answer is the conclusion of the last node whose rule held.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rule::{Rule, RuleError};
use crate::case::Case;
use crate::env::ActionId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Conclusion {
    Explore,
    Recommend(ActionId),
}

impl Conclusion {
    pub fn action(self) -> Option<ActionId> {
        match self {
            Conclusion::Explore => None,
            Conclusion::Recommend(a) => Some(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdrNode {
    pub rule: Rule,
    pub conclusion: Conclusion,
    pub cornerstone: Option<Case>,
    pub true_child: Option<NodeId>,
    pub false_child: Option<NodeId>,
    parent: Option<(NodeId, bool)>,
}

impl RdrNode {
    pub fn child(&self, branch: bool) -> Option<NodeId> {
        if branch {
            self.true_child
        } else {
            self.false_child
        }
    }

    fn slot(&mut self, branch: bool) -> &mut Option<NodeId> {
        if branch {
            &mut self.true_child
        } else {
            &mut self.false_child
        }
    }

    pub fn parent(&self) -> Option<(NodeId, bool)> {
        self.parent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub conclusion: Conclusion,
    /// Last node whose rule held.
    pub classification_node: NodeId,
    /// Last node visited.
    pub insertion_node: NodeId,
    /// Whether the insertion node's rule held, i.e. which of its slots the
    /// walk fell out of.
    pub insertion_branch: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RdrError {
    #[error("rule `{rule}` is false on the case it was given for")]
    RuleRejected { rule: String },
    #[error("rule would change the conclusion for the cornerstone case of node {}", .0 .0)]
    CornerstoneConflict(NodeId),
    #[error("the {} slot of node {} is already occupied", if *.branch { "true" } else { "false" }, .node.0)]
    SlotConflict { node: NodeId, branch: bool },
    #[error("node {} does not exist", .0 .0)]
    UnknownNode(NodeId),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdrTree {
    nodes: Vec<RdrNode>,
}

impl Default for RdrTree {
    fn default() -> Self {
        RdrTree::new()
    }
}

impl RdrTree {
    pub fn new() -> Self {
        RdrTree {
            nodes: vec![RdrNode {
                rule: Rule::Always,
                conclusion: Conclusion::Explore,
                cornerstone: None,
                true_child: None,
                false_child: None,
                parent: None,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn non_root_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node(&self, id: NodeId) -> Result<&RdrNode, RdrError> {
        self.nodes.get(id.0).ok_or(RdrError::UnknownNode(id))
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &RdrNode)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn classify(&self, case: &Case) -> Result<Classification, RuleError> {
        let mut current = NodeId::ROOT;
        let mut fired = NodeId::ROOT;
        loop {
            let node = &self.nodes[current.0];
            let holds = node.rule.eval(case)?;
            if holds {
                fired = current;
            }
            match node.child(holds) {
                Some(next) => current = next,
                None => {
                    return Ok(Classification {
                        conclusion: self.nodes[fired.0].conclusion,
                        classification_node: fired,
                        insertion_node: current,
                        insertion_branch: holds,
                    })
                }
            }
        }
    }

    /// Attaches a node to an empty slot without any checks on the cases.
    pub fn attach(
        &mut self,
        parent: NodeId,
        branch: bool,
        rule: Rule,
        conclusion: Conclusion,
        cornerstone: Option<Case>,
    ) -> Result<NodeId, RdrError> {
        let id = NodeId(self.nodes.len());
        let slot = self
            .nodes
            .get_mut(parent.0)
            .ok_or(RdrError::UnknownNode(parent))?
            .slot(branch);
        if slot.is_some() {
            return Err(RdrError::SlotConflict { node: parent, branch });
        }
        *slot = Some(id);
        self.nodes.push(RdrNode {
            rule,
            conclusion,
            cornerstone,
            true_child: None,
            false_child: None,
            parent: Some((parent, branch)),
        });
        Ok(id)
    }

    /// Adds a recommendation learnt on `cornerstone` below `insertion_node`.
    ///
    /// The node goes in the true slot if the insertion node's rule holds on
    /// the cornerstone, the false slot otherwise. If that slot is taken the
    /// walk continues from its occupant. The rule must hold on the
    /// cornerstone, and no existing cornerstone may change conclusion; on
    /// either failure the tree is left untouched.
    pub fn insert(
        &mut self,
        insertion_node: NodeId,
        rule: Rule,
        action: ActionId,
        cornerstone: Case,
    ) -> Result<NodeId, RdrError> {
        self.node(insertion_node)?;
        if !rule.eval(&cornerstone)? {
            return Err(RdrError::RuleRejected {
                rule: rule.to_string(),
            });
        }
        let mut parent = insertion_node;
        let mut branch = self.nodes[parent.0].rule.eval(&cornerstone)?;
        while let Some(next) = self.nodes[parent.0].child(branch) {
            parent = next;
            branch = self.nodes[parent.0].rule.eval(&cornerstone)?;
        }

        let before = self.cornerstone_conclusions()?;
        let id = self.attach(parent, branch, rule, Conclusion::Recommend(action), Some(cornerstone))?;
        for (node, was) in before {
            let case = self.nodes[node.0].cornerstone.as_ref().expect("listed with a cornerstone");
            if self.classify(case)?.conclusion != was {
                self.detach_last();
                return Err(RdrError::CornerstoneConflict(node));
            }
        }
        Ok(id)
    }

    fn detach_last(&mut self) {
        let node = self.nodes.pop().expect("tree has a root");
        if let Some((parent, branch)) = node.parent {
            *self.nodes[parent.0].slot(branch) = None;
        }
    }

    fn cornerstone_conclusions(&self) -> Result<Vec<(NodeId, Conclusion)>, RuleError> {
        self.nodes()
            .filter_map(|(id, n)| n.cornerstone.as_ref().map(|c| (id, c)))
            .map(|(id, c)| Ok((id, self.classify(c)?.conclusion)))
            .collect()
    }

    /// Depth of the deepest node; the root alone has depth 0.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            let (p, _) = n.parent.expect("non-root nodes have parents");
            depth[i] = depth[p.0] + 1;
        }
        depth.into_iter().max().unwrap_or(0)
    }
}
