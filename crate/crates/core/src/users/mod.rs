//! Simulated trainers.
//!
//! State-based trainers answer from an oracle policy, filtered by
//! availability, accuracy and a knowledge region. Rule-based trainers hold a
//! rule tree and hand its rules over one at a time when the agent is about
//! to do something they disagree with.

pub mod kb;
pub mod oracle;
pub mod profile;
pub mod rule_user;
pub mod state_user;

pub use kb::KnowledgeBase;
pub use oracle::{optimal_mc_action, sdc_avoid_action, Oracle};
pub use profile::{AdviceKind, Region, Reliability, TrainerLevel};
pub use rule_user::{RuleAdvice, RuleUser};
pub use state_user::StateUser;
