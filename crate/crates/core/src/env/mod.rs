//! Simulated tasks: mountain car and a top-down self-driving car.
//!
//! Both expose the same [`Environment`] interface to the learning loop: a
//! discrete state index for the Q-table, a [`Case`] view for trainers and rule
//! trees, and a deterministic step function.

pub mod driving;
pub mod map;
pub mod mountain_car;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case::{Case, Schema};
use crate::rng::SimRng;

pub use driving::{DrivingConfig, SelfDrivingCar};
pub use map::ObstacleMap;
pub use mountain_car::{MountainCar, MountainCarConfig};

/// Row index into a Q-table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub usize);

/// Column index into a Q-table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("state feature `{0}` is NaN")]
    NotANumber(&'static str),
    #[error("velocity {0} is not one of the legal levels 1.0, 1.5, ..., 5.0")]
    IllegalVelocity(f64),
    #[error("state id {0} is outside the observation space")]
    StateOutOfRange(usize),
    #[error("action {0} is not defined for this environment")]
    UnknownAction(usize),
    #[error("no collision-free spawn pose found after {0} attempts")]
    RespawnExhausted(usize),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("cannot read map {path}: {message}")]
    MapIo { path: PathBuf, message: String },
}

/// The two task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    MountainCar,
    SelfDrivingCar,
}

impl EnvKind {
    pub fn actions(self) -> ActionSpace {
        match self {
            EnvKind::MountainCar => ActionSpace::MOUNTAIN_CAR,
            EnvKind::SelfDrivingCar => ActionSpace::DRIVING,
        }
    }

    pub fn schema(self) -> Schema {
        match self {
            EnvKind::MountainCar => mountain_car::schema(),
            EnvKind::SelfDrivingCar => driving::schema(),
        }
    }
}

/// Action labels of an environment.
///
/// `labels` are the upper-case conclusions used in rule trees (`GO RIGHT`),
/// `names` the short identifiers used on the wire (`right`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionSpace {
    labels: &'static [&'static str],
    names: &'static [&'static str],
}

impl ActionSpace {
    pub const MOUNTAIN_CAR: ActionSpace = ActionSpace {
        labels: &["GO LEFT", "DO NOTHING", "GO RIGHT"],
        names: &["left", "nothing", "right"],
    };

    pub const DRIVING: ActionSpace = ActionSpace {
        labels: &["ACCELERATE", "DECELERATE", "TURN LEFT", "TURN RIGHT", "DO NOTHING"],
        names: &["accelerate", "decelerate", "turn-left", "turn-right", "nothing"],
    };

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, action: ActionId) -> &'static str {
        self.labels[action.0]
    }

    pub fn name(&self, action: ActionId) -> &'static str {
        self.names[action.0]
    }

    pub fn labels(&self) -> &'static [&'static str] {
        self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = ActionId> {
        (0..self.labels.len()).map(ActionId)
    }

    /// Resolves a label or short name, ignoring case, `-`/`_` vs space, and an
    /// optional leading `GO`.
    pub fn parse(&self, text: &str) -> Option<ActionId> {
        let wanted = normalize_label(text);
        let bare = wanted.strip_prefix("GO ").unwrap_or(&wanted);
        self.labels
            .iter()
            .zip(self.names)
            .position(|(label, name)| {
                let label = normalize_label(label);
                let short = normalize_label(name);
                label == wanted
                    || short == wanted
                    || label.strip_prefix("GO ").unwrap_or(&label) == bare
                    || short == bare
            })
            .map(ActionId)
    }
}

fn normalize_label(text: &str) -> String {
    text.split(|c: char| c.is_whitespace() || c == '-' || c == '_')
        .filter(|s| !s.is_empty())
        .map(|s| s.to_ascii_uppercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// One executed step, with both observations as cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state_before: Case,
    pub action: ActionId,
    pub reward: f64,
    pub state_after: Case,
    pub terminal: bool,
}

/// What the learning loop needs back from a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub terminal: bool,
    pub collided: bool,
}

/// A task the learning loop can drive.
pub trait Environment: Send {
    fn kind(&self) -> EnvKind;

    fn schema(&self) -> &Schema;

    fn actions(&self) -> ActionSpace {
        self.kind().actions()
    }

    /// Size of the discrete observation space.
    fn state_count(&self) -> usize;

    /// Episode step cap.
    fn max_steps(&self) -> usize;

    fn reset(&mut self, rng: &mut SimRng) -> Result<(), EnvError>;

    fn step(&mut self, action: ActionId, rng: &mut SimRng) -> Result<StepOutcome, EnvError>;

    fn state_id(&self) -> Result<StateId, EnvError>;

    fn case(&self) -> Case;

    /// Steps and packages the result as a [`Transition`].
    fn transition(&mut self, action: ActionId, rng: &mut SimRng) -> Result<Transition, EnvError> {
        let state_before = self.case();
        let outcome = self.step(action, rng)?;
        Ok(Transition {
            state_before,
            action,
            reward: outcome.reward,
            state_after: self.case(),
            terminal: outcome.terminal,
        })
    }
}

/// The `env` section of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub kind: EnvKind,
    pub mountain_car: MountainCarConfig,
    pub driving: DrivingConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            kind: EnvKind::MountainCar,
            mountain_car: MountainCarConfig::default(),
            driving: DrivingConfig::default(),
        }
    }
}

impl EnvConfig {
    /// Builds a fresh environment; the obstacle map is loaded once per call.
    pub fn build(&self) -> Result<Box<dyn Environment>, EnvError> {
        Ok(match self.kind {
            EnvKind::MountainCar => Box::new(MountainCar::new(self.mountain_car.clone())),
            EnvKind::SelfDrivingCar => {
                let map = self.driving.load_map()?;
                Box::new(SelfDrivingCar::new(self.driving.clone(), map.into()))
            }
        })
    }

    pub fn max_steps(&self) -> usize {
        match self.kind {
            EnvKind::MountainCar => self.mountain_car.max_steps,
            EnvKind::SelfDrivingCar => self.driving.max_steps,
        }
    }
}
