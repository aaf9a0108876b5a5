//! Retained advice: the rule language, ripple-down-rules trees and the flat
//! per-state stores.

pub mod diff;
pub mod format;
pub mod parser;
pub mod rdr;
pub mod rule;
pub mod store;

pub use diff::{case_diff, FeatureDiff, SchemaMismatch};
pub use parser::{parse_rule, ParseError};
pub use rdr::{Classification, Conclusion, NodeId, RdrError, RdrTree};
pub use rule::{Comparator, Literal, Predicate, Rule, RuleError};
pub use store::{CornerstoneIndex, EvalAdviceStore, StateAdviceStore};
