//! Wire format: one JSON envelope per line, `{type, session, seq, payload}`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::advice::FeatureDiff;
use crate::case::{Case, FeatureKind};
use crate::env::EnvKind;
use crate::harness::{AgentKind, Config};
use crate::rl::ActionSource;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    #[serde(default)]
    pub seq: u64,
    #[serde(default)]
    pub payload: Value,
}

impl Envelope {
    pub fn new<T: Serialize>(kind: &str, session: Option<&str>, seq: u64, payload: &T) -> Self {
        Envelope {
            kind: kind.to_string(),
            session: session.map(str::to_string),
            seq,
            payload: serde_json::to_value(payload).expect("payload serializes"),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("envelope serializes")
    }

    pub fn parse(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }

    pub fn payload_as<T: for<'de> Deserialize<'de>>(&self) -> Result<T, serde_json::Error> {
        let payload = if self.payload.is_null() {
            Value::Object(Default::default())
        } else {
            self.payload.clone()
        };
        serde_json::from_value(payload)
    }
}

/// When a session asks its trainer for advice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum PromptPolicy {
    EveryStep,
    Never,
    /// Only when retained advice suggests an action.
    WhenModelFires,
    EveryN { n: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionOptions {
    pub prompt: PromptPolicy,
    /// How long a running session waits for a reply before ignoring a prompt.
    pub timeout_ms: u64,
    /// Attach the Q-table to the update closing each episode.
    pub q_snapshots: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions {
            prompt: PromptPolicy::EveryStep,
            timeout_ms: 10_000,
            q_snapshots: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpenRequest {
    pub config: Option<Config>,
    #[serde(flatten)]
    pub options: SessionOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionInfo {
    pub name: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opened {
    pub session: String,
    pub env: EnvKind,
    pub agent: AgentKind,
    pub schema: Vec<(String, FeatureKind)>,
    pub actions: Vec<ActionInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateUpdate {
    pub step: u64,
    pub case: Case,
    pub reward: f64,
    pub episode: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_snapshot: Option<Vec<Vec<f64>>>,
    pub action: String,
    pub source: ActionSource,
    pub terminal: bool,
    pub episode_done: bool,
    pub interactions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub step: u64,
    pub episode: u64,
    pub case: Case,
    pub intended_action: String,
    pub source: ActionSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cornerstone: Option<Case>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<Vec<FeatureDiff>>,
    /// Whether the previous step is still open to an evaluation.
    pub can_evaluate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubmitKind {
    Approve,
    Action,
    Rule,
    Evaluate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub step: u64,
    pub kind: SubmitKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i32>,
}

impl Submission {
    pub fn approve(step: u64) -> Self {
        Submission {
            step,
            kind: SubmitKind::Approve,
            action: None,
            rule_text: None,
            sign: None,
        }
    }

    pub fn action(step: u64, action: &str) -> Self {
        Submission {
            kind: SubmitKind::Action,
            action: Some(action.to_string()),
            ..Submission::approve(step)
        }
    }

    pub fn rule(step: u64, rule_text: &str, action: &str) -> Self {
        Submission {
            kind: SubmitKind::Rule,
            action: Some(action.to_string()),
            rule_text: Some(rule_text.to_string()),
            ..Submission::approve(step)
        }
    }

    pub fn evaluate(step: u64, sign: i32) -> Self {
        Submission {
            kind: SubmitKind::Evaluate,
            sign: Some(sign),
            ..Submission::approve(step)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlMode {
    Pause,
    Step,
    Run,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub mode: ControlMode,
    /// Steps per second when running; unthrottled when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// Steps to take in step mode (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
}

/// Reply to a `snapshot` request: the learned values and retained advice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub q: Vec<Vec<f64>>,
    pub advice: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMessage {
    pub code: String,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_round_trip_keeps_field_names() {
        let env = Envelope::new("submit", Some("s1"), 4, &Submission::rule(7, "velocity > 0", "right"));
        let line = env.to_line();
        assert!(line.starts_with(r#"{"type":"submit","session":"s1","seq":4,"payload":{"#), "{line}");
        assert!(line.contains(r#""rule_text":"velocity > 0""#));
        assert_eq!(Envelope::parse(&line).unwrap(), env);
    }

    #[test]
    fn open_request_accepts_flat_options() {
        let env = Envelope::parse(r#"{"type":"open","payload":{"prompt":{"policy":"every-n","n":5},"timeout_ms":50}}"#).unwrap();
        let open: OpenRequest = env.payload_as().unwrap();
        assert_eq!(open.options.prompt, PromptPolicy::EveryN { n: 5 });
        assert_eq!(open.options.timeout_ms, 50);
        assert!(open.config.is_none());
        let bare: OpenRequest = Envelope::parse(r#"{"type":"open"}"#).unwrap().payload_as().unwrap();
        assert_eq!(bare, OpenRequest::default());
    }
}
