//! Experiment configuration, read from TOML or JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::agent::AgentKind;
use crate::advice::format::from_text;
use crate::advice::RdrTree;
use crate::env::{EnvConfig, EnvKind};
use crate::rl::{LearningParams, PprConfig};
use crate::users::{AdviceKind, KnowledgeBase, Region, Reliability, TrainerLevel};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub kind: AgentKind,
    /// Defaults depend on the environment when left out.
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            kind: AgentKind::Uql,
            alpha: None,
            gamma: None,
            epsilon: None,
        }
    }
}

impl AgentConfig {
    pub fn learning_params(&self, env: EnvKind) -> LearningParams {
        let base = match env {
            EnvKind::MountainCar => LearningParams::MOUNTAIN_CAR,
            EnvKind::SelfDrivingCar => LearningParams::DRIVING,
        };
        LearningParams {
            alpha: self.alpha.unwrap_or(base.alpha),
            gamma: self.gamma.unwrap_or(base.gamma),
            epsilon: self.epsilon.unwrap_or(base.epsilon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserKind {
    None,
    Evaluative,
    Informative,
    Rule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserConfig {
    pub kind: UserKind,
    /// Preset accuracy and availability; explicit values override it.
    pub level: Option<TrainerLevel>,
    pub accuracy: Option<f64>,
    pub availability: Option<f64>,
    pub region: Region,
    pub knowledge_base: Option<KnowledgeBase>,
    /// A rule tree in the indented text form, instead of a bundled one.
    pub knowledge_base_file: Option<PathBuf>,
}

impl Default for UserConfig {
    fn default() -> Self {
        UserConfig {
            kind: UserKind::None,
            level: None,
            accuracy: None,
            availability: None,
            region: Region::Full,
            knowledge_base: None,
            knowledge_base_file: None,
        }
    }
}

impl UserConfig {
    pub fn reliability(&self) -> Reliability {
        let base = match (self.kind, self.level) {
            (UserKind::Evaluative, Some(level)) => Reliability::of(AdviceKind::Evaluative, level),
            (UserKind::Informative, Some(level)) => Reliability::of(AdviceKind::Informative, level),
            _ => Reliability::PERFECT,
        };
        Reliability {
            accuracy: self.accuracy.unwrap_or(base.accuracy),
            availability: self.availability.unwrap_or(base.availability),
        }
    }

    pub fn knowledge_tree(&self, env: EnvKind) -> Result<RdrTree, ConfigError> {
        if let Some(path) = &self.knowledge_base_file {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            return from_text(&text, &env.actions()).map_err(|e| ConfigError::Syntax {
                path: path.clone(),
                message: e.to_string(),
            });
        }
        let kb = self.knowledge_base.unwrap_or(match env {
            EnvKind::MountainCar => KnowledgeBase::McFull,
            EnvKind::SelfDrivingCar => KnowledgeBase::ScAvoid,
        });
        if kb.env() != env {
            return Err(ConfigError::Invalid(format!("knowledge base {kb} is for another environment")));
        }
        Ok(kb.tree())
    }

    /// Short label used in summaries.
    pub fn label(&self) -> String {
        match self.kind {
            UserKind::None => "none".into(),
            UserKind::Rule => match (&self.knowledge_base_file, self.knowledge_base) {
                (Some(path), _) => format!("rule:{}", path.display()),
                (None, Some(kb)) => format!("rule:{kb}"),
                (None, None) => "rule:default".into(),
            },
            UserKind::Evaluative | UserKind::Informative => {
                let kind = if self.kind == UserKind::Evaluative { "evaluative" } else { "informative" };
                let level = match (self.level, self.accuracy, self.availability) {
                    (_, Some(_), _) | (_, _, Some(_)) => "custom",
                    (Some(TrainerLevel::Optimistic), ..) => "optimistic",
                    (Some(TrainerLevel::Realistic), ..) => "realistic",
                    (Some(TrainerLevel::Pessimistic), ..) => "pessimistic",
                    (None, None, None) => "perfect",
                };
                format!("{kind}:{level}:{}", self.region)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdviceConfig {
    /// Size of an evaluative reward.
    pub eval_magnitude: f64,
}

impl Default for AdviceConfig {
    fn default() -> Self {
        AdviceConfig { eval_magnitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    pub runs: usize,
    pub episodes: usize,
    pub seed: u64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            runs: 100,
            episodes: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub user: UserConfig,
    pub ppr: PprConfig,
    pub advice: AdviceConfig,
    pub experiment: ExperimentSettings,
}

impl Config {
    /// Reads `.json` files as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config = if is_json {
            Config::from_json(&text)
        } else {
            Config::from_toml(&text)
        };
        config.map_err(|message| ConfigError::Syntax {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn learning_params(&self) -> LearningParams {
        self.agent.learning_params(self.env.kind)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        self.learning_params()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let r = self.user.reliability();
        for (name, p) in [("accuracy", r.accuracy), ("availability", r.availability)] {
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("user {name} {p} is not in [0, 1]"));
            }
        }
        for (name, p) in [("p_reuse", self.ppr.p_reuse), ("floor", self.ppr.floor)] {
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("ppr {name} {p} is not in [0, 1]"));
            }
        }
        if !(self.ppr.decay >= 0.0 && self.ppr.decay <= 1.0) {
            return invalid(format!("ppr decay {} is not in [0, 1]", self.ppr.decay));
        }
        if !self.advice.eval_magnitude.is_finite() {
            return invalid("advice eval_magnitude must be finite".into());
        }
        if self.experiment.runs == 0 || self.experiment.episodes == 0 {
            return invalid("experiment needs at least one run and one episode".into());
        }
        let agent = self.agent.kind;
        let compatible = match self.user.kind {
            UserKind::None => true,
            UserKind::Evaluative => agent.advice_kind() == Some(AdviceKind::Evaluative),
            UserKind::Informative => agent.advice_kind() == Some(AdviceKind::Informative),
            UserKind::Rule => agent == AgentKind::Rdr,
        };
        if !compatible {
            return invalid(format!("a {:?} user cannot advise a {agent} agent", self.user.kind));
        }
        self.user
            .region
            .rule()
            .validate(&self.env.kind.schema())
            .map_err(|e| ConfigError::Invalid(format!("user region: {e}")))?;
        if self.user.kind == UserKind::Rule {
            self.user.knowledge_tree(self.env.kind)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_gives_defaults() {
        let c = Config::from_toml("").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.experiment.runs, 100);
        assert_eq!(c.learning_params(), LearningParams::MOUNTAIN_CAR);
        c.validate().unwrap();
    }

    #[test]
    fn sections_parse_from_toml_and_json() {
        let toml = r#"
            [env]
            kind = "self-driving-car"
            [agent]
            kind = "pi"
            epsilon = 0.05
            [user]
            kind = "informative"
            level = "realistic"
            region = "avoid"
            [ppr]
            mode = "always-follow"
            [experiment]
            runs = 3
            episodes = 7
            seed = 42
        "#;
        let c = Config::from_toml(toml).unwrap();
        assert_eq!(c.env.kind, EnvKind::SelfDrivingCar);
        assert_eq!(c.learning_params(), LearningParams { epsilon: 0.05, ..LearningParams::DRIVING });
        assert_eq!(c.user.reliability().accuracy, 0.9487);
        c.validate().unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(Config::from_json(&json).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_mismatched_users_are_rejected() {
        assert!(Config::from_toml("[agent]\nkindd = \"pi\"").is_err());
        let mut c = Config::default();
        c.agent.kind = AgentKind::Pi;
        c.user.kind = UserKind::Evaluative;
        assert!(c.validate().is_err());
        c.user.kind = UserKind::Informative;
        c.user.region = Region::Avoid;
        assert!(c.validate().is_err());
    }
}
