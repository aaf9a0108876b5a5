//! Bundled rule trees for the rule-based trainers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::advice::format::from_text;
use crate::advice::RdrTree;
use crate::env::EnvKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KnowledgeBase {
    McFull,
    McHalf,
    McQuarter,
    McMiddle,
    ScAvoid,
}

impl KnowledgeBase {
    pub const ALL: [KnowledgeBase; 5] = [
        KnowledgeBase::McFull,
        KnowledgeBase::McHalf,
        KnowledgeBase::McQuarter,
        KnowledgeBase::McMiddle,
        KnowledgeBase::ScAvoid,
    ];

    pub fn text(self) -> &'static str {
        match self {
            KnowledgeBase::McFull => include_str!("../../assets/kb/mc-full.rdr"),
            KnowledgeBase::McHalf => include_str!("../../assets/kb/mc-half.rdr"),
            KnowledgeBase::McQuarter => include_str!("../../assets/kb/mc-quarter.rdr"),
            KnowledgeBase::McMiddle => include_str!("../../assets/kb/mc-middle.rdr"),
            KnowledgeBase::ScAvoid => include_str!("../../assets/kb/sc-avoid.rdr"),
        }
    }

    pub fn env(self) -> EnvKind {
        match self {
            KnowledgeBase::ScAvoid => EnvKind::SelfDrivingCar,
            _ => EnvKind::MountainCar,
        }
    }

    pub fn tree(self) -> RdrTree {
        from_text(self.text(), &self.env().actions()).expect("bundled knowledge bases parse")
    }

    pub fn name(self) -> &'static str {
        match self {
            KnowledgeBase::McFull => "MC-FULL",
            KnowledgeBase::McHalf => "MC-HALF",
            KnowledgeBase::McQuarter => "MC-QUARTER",
            KnowledgeBase::McMiddle => "MC-MIDDLE",
            KnowledgeBase::ScAvoid => "SC-AVOID",
        }
    }
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advice::format::to_text;
    use crate::advice::{Conclusion, NodeId};
    use crate::case::Case;
    use crate::env::ActionId;

    #[test]
    fn node_counts() {
        let counts: Vec<_> = KnowledgeBase::ALL.iter().map(|kb| kb.tree().non_root_count()).collect();
        assert_eq!(counts, [2, 3, 3, 3, 2]);
    }

    #[test]
    fn files_are_in_canonical_form() {
        for kb in KnowledgeBase::ALL {
            assert_eq!(to_text(&kb.tree(), &kb.env().actions()), kb.text(), "{kb}");
        }
    }

    #[test]
    fn full_model_classifies_by_velocity() {
        let tree = KnowledgeBase::McFull.tree();
        let at = |v: f64| tree.classify(&Case::new().with("velocity", v)).unwrap();
        assert_eq!(at(0.01).conclusion, Conclusion::Recommend(ActionId(2)));
        let left = at(-0.02);
        assert_eq!(left.conclusion, Conclusion::Recommend(ActionId(0)));
        assert_ne!(left.classification_node, NodeId::ROOT);
    }
}
