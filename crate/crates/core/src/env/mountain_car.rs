//! Mountain car with the classic discrete-action dynamics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ActionId, EnvError, EnvKind, Environment, StateId, StepOutcome, Transition};
use crate::case::{Case, FeatureKind, FeatureValue, Schema};
use crate::rng::SimRng;

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.6;
const FORCE: f64 = 0.001;
const GRAVITY: f64 = 0.0025;

pub fn schema() -> Schema {
    Schema::new(&[("position", FeatureKind::Real), ("velocity", FeatureKind::Real)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McState {
    pub position: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum McAction {
    Left,
    Nothing,
    Right,
}

impl McAction {
    pub const ALL: [McAction; 3] = [McAction::Left, McAction::Nothing, McAction::Right];

    pub fn id(self) -> ActionId {
        ActionId(self as usize)
    }

    pub fn from_id(id: ActionId) -> Result<Self, EnvError> {
        McAction::ALL
            .get(id.0)
            .copied()
            .ok_or(EnvError::UnknownAction(id.0))
    }

    fn direction(self) -> f64 {
        match self {
            McAction::Left => -1.0,
            McAction::Nothing => 0.0,
            McAction::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MountainCarConfig {
    /// Start positions are drawn uniformly from `[start_low, start_high]`.
    pub start_low: f64,
    pub start_high: f64,
    pub max_steps: usize,
    /// Bins per feature.
    pub bins: usize,
}

impl Default for MountainCarConfig {
    fn default() -> Self {
        MountainCarConfig {
            start_low: -0.6,
            start_high: -0.4,
            max_steps: 1000,
            bins: 20,
        }
    }
}

pub fn reset<R: Rng + ?Sized>(config: &MountainCarConfig, rng: &mut R) -> McState {
    McState {
        position: rng.random_range(config.start_low..=config.start_high),
        velocity: 0.0,
    }
}

/// Result of one mountain-car step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McStep {
    pub next: McState,
    pub reward: f64,
    pub terminal: bool,
}

pub fn step(state: McState, action: McAction) -> McStep {
    let mut velocity = state.velocity + FORCE * action.direction()
        - GRAVITY * (3.0 * state.position).cos();
    velocity = velocity.clamp(-MAX_SPEED, MAX_SPEED);
    let position = (state.position + velocity).clamp(MIN_POSITION, MAX_POSITION);
    if position <= MIN_POSITION && velocity < 0.0 {
        velocity = 0.0;
    }
    let terminal = position >= GOAL_POSITION;
    McStep {
        next: McState { position, velocity },
        reward: if terminal { 0.0 } else { -1.0 },
        terminal,
    }
}

fn bin(value: f64, low: f64, high: f64, bins: usize) -> usize {
    let scaled = ((value - low) / (high - low) * bins as f64).floor();
    if scaled <= 0.0 {
        0
    } else {
        (scaled as usize).min(bins - 1)
    }
}

/// Maps a state onto `position_bin * bins + velocity_bin`.
pub fn discretize(state: McState, bins: usize) -> Result<StateId, EnvError> {
    if state.position.is_nan() {
        return Err(EnvError::NotANumber("position"));
    }
    if state.velocity.is_nan() {
        return Err(EnvError::NotANumber("velocity"));
    }
    let p = bin(state.position, MIN_POSITION, MAX_POSITION, bins);
    let v = bin(state.velocity, -MAX_SPEED, MAX_SPEED, bins);
    Ok(StateId(p * bins + v))
}

pub struct MountainCar {
    config: MountainCarConfig,
    state: McState,
    schema: Schema,
}

impl MountainCar {
    pub fn new(config: MountainCarConfig) -> Self {
        let state = McState {
            position: (config.start_low + config.start_high) / 2.0,
            velocity: 0.0,
        };
        MountainCar {
            config,
            state,
            schema: schema(),
        }
    }

    pub fn config(&self) -> &MountainCarConfig {
        &self.config
    }

    pub fn state(&self) -> McState {
        self.state
    }

    pub fn set_state(&mut self, state: McState) {
        self.state = state;
    }

    pub fn case_of(&self, state: McState) -> Case {
        self.schema.case([
            FeatureValue::Real(state.position),
            FeatureValue::Real(state.velocity),
        ])
    }

    /// Pure step from an explicit state, returning both cases.
    pub fn transition_from(&self, state: McState, action: McAction) -> Transition {
        let result = step(state, action);
        Transition {
            state_before: self.case_of(state),
            action: action.id(),
            reward: result.reward,
            state_after: self.case_of(result.next),
            terminal: result.terminal,
        }
    }
}

impl Environment for MountainCar {
    fn kind(&self) -> EnvKind {
        EnvKind::MountainCar
    }

    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn state_count(&self) -> usize {
        self.config.bins * self.config.bins
    }

    fn max_steps(&self) -> usize {
        self.config.max_steps
    }

    fn reset(&mut self, rng: &mut SimRng) -> Result<(), EnvError> {
        self.state = reset(&self.config, rng);
        Ok(())
    }

    fn step(&mut self, action: ActionId, _rng: &mut SimRng) -> Result<StepOutcome, EnvError> {
        let result = step(self.state, McAction::from_id(action)?);
        self.state = result.next;
        Ok(StepOutcome {
            reward: result.reward,
            terminal: result.terminal,
            collided: false,
        })
    }

    fn state_id(&self) -> Result<StateId, EnvError> {
        discretize(self.state, self.config.bins)
    }

    fn case(&self) -> Case {
        self.case_of(self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::collections::BTreeSet;

    #[test]
    fn reset_starts_at_rest_inside_the_interval() {
        let config = MountainCarConfig::default();
        let mut rng = seeded(3);
        for _ in 0..1000 {
            let s = reset(&config, &mut rng);
            assert_eq!(s.velocity, 0.0);
            assert!((-0.6..=-0.4).contains(&s.position));
        }
    }

    #[test]
    fn reset_is_deterministic_per_seed() {
        let config = MountainCarConfig::default();
        assert_eq!(reset(&config, &mut seeded(11)), reset(&config, &mut seeded(11)));
    }

    #[test]
    fn reset_mean_is_the_interval_midpoint() {
        let config = MountainCarConfig::default();
        let mut rng = seeded(5);
        let n = 10_000;
        let mean = (0..n).map(|_| reset(&config, &mut rng).position).sum::<f64>() / n as f64;
        assert!((mean - -0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn coasting_from_the_valley_floor() {
        // v' = -0.0025 cos(-1.5), evaluated by hand.
        let expected_v = -0.0025 * 0.070_737_201_667_702_91;
        let r = step(McState { position: -0.5, velocity: 0.0 }, McAction::Nothing);
        assert!((r.next.velocity - expected_v).abs() < 1e-15);
        assert!((r.next.velocity - -0.000_177).abs() < 1e-6);
        assert!((r.next.position - -0.500_177).abs() < 1e-6);
        assert_eq!(r.reward, -1.0);
        assert!(!r.terminal);
    }

    #[test]
    fn reaching_the_hill_is_terminal_with_zero_reward() {
        let r = step(McState { position: 0.599, velocity: 0.07 }, McAction::Right);
        assert!(r.terminal);
        assert_eq!(r.reward, 0.0);
        assert_eq!(r.next.position, MAX_POSITION);
    }

    #[test]
    fn left_wall_stops_the_car() {
        let r = step(McState { position: -1.2, velocity: -0.07 }, McAction::Left);
        assert_eq!(r.next.position, -1.2);
        assert_eq!(r.next.velocity, 0.0);
    }

    #[test]
    fn discretization_boundaries() {
        let lo = discretize(McState { position: -1.2, velocity: -0.07 }, 20).unwrap();
        let hi = discretize(McState { position: 0.6, velocity: 0.07 }, 20).unwrap();
        assert_eq!(lo, StateId(0));
        assert_eq!(hi, StateId(399));
        assert_eq!(
            discretize(McState { position: f64::NAN, velocity: 0.0 }, 20),
            Err(EnvError::NotANumber("position"))
        );
    }

    #[test]
    fn bin_centres_cover_four_hundred_states() {
        let mut ids = BTreeSet::new();
        for p in 0..20 {
            for v in 0..20 {
                let position = MIN_POSITION + (p as f64 + 0.5) * 0.09;
                let velocity = -MAX_SPEED + (v as f64 + 0.5) * 0.007;
                ids.insert(discretize(McState { position, velocity }, 20).unwrap());
            }
        }
        assert_eq!(ids.len(), 400);
        assert_eq!(ids.first(), Some(&StateId(0)));
        assert_eq!(ids.last(), Some(&StateId(399)));
    }

    #[test]
    fn zero_velocity_falls_in_the_first_non_negative_bin() {
        let id = discretize(McState { position: -1.2, velocity: 0.0 }, 20).unwrap();
        assert_eq!(id, StateId(10));
    }
}
