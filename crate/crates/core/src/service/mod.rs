//! Live advising sessions for a human trainer.
//!
//! A client opens a session, steps or runs it, and answers prompts with
//! approvals, recommended actions, rules or evaluations. See
//! [`protocol`] for the message set.

pub mod log;
pub mod protocol;
pub mod server;
pub mod session;

pub use log::{read_log, replay, replay_file, EventLog, LogError, LogEvent};
pub use protocol::{Envelope, Prompt, PromptPolicy, SessionOptions, StateUpdate, Submission};
pub use server::{Server, ServerSettings};
pub use session::{Resolution, Session, SessionError};
