//! Top-down self-driving car with boolean collision sensors.
//!
//! The agent sees eight sensors in its own frame plus its speed; its world
//! pose stays hidden. Headings are degrees counter-clockwise from +x, so
//! turning left increases the heading. Sensor offsets are given in the car
//! frame with +y pointing forward and +x to the right.

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::map::{ObstacleMap, RayConfig};
use super::{ActionId, EnvError, EnvKind, Environment, StateId, StepOutcome};
use crate::case::{Case, FeatureKind, FeatureValue, Schema};
use crate::rng::SimRng;

pub const SENSOR_NAMES: [&str; 8] = [
    "left",
    "right",
    "left-front-close",
    "right-front-close",
    "left-front-far",
    "right-front-far",
    "front-close",
    "front-far",
];

pub const MIN_VELOCITY: f64 = 1.0;
pub const MAX_VELOCITY: f64 = 5.0;
pub const VELOCITY_STEP: f64 = 0.5;
pub const VELOCITY_LEVELS: usize = 9;
pub const OBSERVATION_COUNT: usize = 256 * VELOCITY_LEVELS;
pub const COLLISION_PENALTY: f64 = -100.0;

pub fn schema() -> Schema {
    let mut features: Vec<(&str, FeatureKind)> =
        SENSOR_NAMES.iter().map(|n| (*n, FeatureKind::Bool)).collect();
    features.push(("velocity", FeatureKind::Real));
    Schema::new(&features)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Degrees in `[0, 360)`.
    pub heading: f64,
}

impl Pose {
    /// Converts a car-frame offset (`+y` forward, `+x` right) to world coordinates.
    pub fn to_world(&self, right: f64, forward: f64) -> (f64, f64) {
        let (sin, cos) = self.heading.to_radians().sin_cos();
        (
            self.x + forward * cos + right * sin,
            self.y + forward * sin - right * cos,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SdcAction {
    Accelerate,
    Decelerate,
    TurnLeft,
    TurnRight,
    Nothing,
}

impl SdcAction {
    pub const ALL: [SdcAction; 5] = [
        SdcAction::Accelerate,
        SdcAction::Decelerate,
        SdcAction::TurnLeft,
        SdcAction::TurnRight,
        SdcAction::Nothing,
    ];

    pub fn id(self) -> ActionId {
        ActionId(self as usize)
    }

    pub fn from_id(id: ActionId) -> Result<Self, EnvError> {
        SdcAction::ALL
            .get(id.0)
            .copied()
            .ok_or(EnvError::UnknownAction(id.0))
    }
}

/// Sensor readings plus the speed level (`0` is 1.0 m/s, `8` is 5.0 m/s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SdcObservation {
    pub sensors: [bool; 8],
    pub velocity_level: u8,
}

impl SdcObservation {
    pub fn new(sensors: [bool; 8], velocity: f64) -> Result<Self, EnvError> {
        Ok(SdcObservation {
            sensors,
            velocity_level: velocity_level(velocity)?,
        })
    }

    pub fn velocity(&self) -> f64 {
        MIN_VELOCITY + VELOCITY_STEP * self.velocity_level as f64
    }

    /// `velocity_level * 256 + sensor_mask`, with sensor `i` at bit `i`.
    pub fn encode(&self) -> StateId {
        let mask = self
            .sensors
            .iter()
            .enumerate()
            .fold(0usize, |m, (i, &on)| m | (usize::from(on) << i));
        StateId(self.velocity_level as usize * 256 + mask)
    }

    pub fn decode(id: StateId) -> Result<Self, EnvError> {
        if id.0 >= OBSERVATION_COUNT {
            return Err(EnvError::StateOutOfRange(id.0));
        }
        let mask = id.0 % 256;
        let mut sensors = [false; 8];
        for (i, s) in sensors.iter_mut().enumerate() {
            *s = mask & (1 << i) != 0;
        }
        Ok(SdcObservation {
            sensors,
            velocity_level: (id.0 / 256) as u8,
        })
    }

    pub fn case(&self, schema: &Schema) -> Case {
        schema.case(
            self.sensors
                .iter()
                .map(|&b| FeatureValue::Bool(b))
                .chain(std::iter::once(FeatureValue::Real(self.velocity()))),
        )
    }
}

pub fn velocity_level(velocity: f64) -> Result<u8, EnvError> {
    let steps = (velocity - MIN_VELOCITY) / VELOCITY_STEP;
    let level = steps.round();
    if !velocity.is_finite()
        || (steps - level).abs() > 1e-9
        || level < 0.0
        || level >= VELOCITY_LEVELS as f64
    {
        return Err(EnvError::IllegalVelocity(velocity));
    }
    Ok(level as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionMode {
    /// Penalise and end the episode.
    Terminate,
    /// Penalise, respawn at a safe pose and keep going.
    RespawnInEpisode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartVelocity {
    Random,
    LowerLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartHeading {
    LongestRay,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrivingConfig {
    pub dt: f64,
    pub car_radius: f64,
    pub turn_deg: f64,
    /// Car-frame `[right, forward]` probe offsets, in [`SENSOR_NAMES`] order.
    pub probes: [[f64; 2]; 8],
    pub collision_mode: CollisionMode,
    pub start_velocity: StartVelocity,
    pub start_heading: StartHeading,
    pub max_steps: usize,
    pub respawn_attempts: usize,
    pub rays: RayConfig,
    /// Map file; the bundled map is used when absent.
    pub map: Option<PathBuf>,
}

impl Default for DrivingConfig {
    fn default() -> Self {
        DrivingConfig {
            dt: 0.2,
            car_radius: 1.0,
            turn_deg: 5.0,
            probes: [
                [-2.0, 0.0],
                [2.0, 0.0],
                [-1.5, 2.0],
                [1.5, 2.0],
                [-3.0, 4.0],
                [3.0, 4.0],
                [0.0, 2.0],
                [0.0, 5.0],
            ],
            collision_mode: CollisionMode::Terminate,
            start_velocity: StartVelocity::Random,
            start_heading: StartHeading::LongestRay,
            max_steps: 3000,
            respawn_attempts: 10_000,
            rays: RayConfig::default(),
            map: None,
        }
    }
}

impl DrivingConfig {
    pub fn load_map(&self) -> Result<ObstacleMap, EnvError> {
        match &self.map {
            Some(path) => ObstacleMap::load(path),
            None => Ok(ObstacleMap::default_map()),
        }
    }
}

pub fn sense(pose: &Pose, map: &ObstacleMap, probes: &[[f64; 2]; 8]) -> [bool; 8] {
    let mut sensors = [false; 8];
    for (s, [right, forward]) in sensors.iter_mut().zip(probes) {
        let (x, y) = pose.to_world(*right, *forward);
        *s = map.blocked(x, y);
    }
    sensors
}

/// Uniform rejection sampling of a position with clearance `car_radius`.
pub fn spawn_position<R: Rng + ?Sized>(
    map: &ObstacleMap,
    config: &DrivingConfig,
    rng: &mut R,
) -> Result<(f64, f64), EnvError> {
    let r = config.car_radius;
    if map.width_m <= 2.0 * r || map.height_m <= 2.0 * r {
        return Err(EnvError::RespawnExhausted(0));
    }
    for _ in 0..config.respawn_attempts {
        let x = rng.random_range(r..=map.width_m - r);
        let y = rng.random_range(r..=map.height_m - r);
        if !map.collides(x, y, r) {
            return Ok((x, y));
        }
    }
    Err(EnvError::RespawnExhausted(config.respawn_attempts))
}

/// Safe pose facing the direction with the most room. The caller resets the
/// speed to the lower limit.
pub fn respawn<R: Rng + ?Sized>(
    map: &ObstacleMap,
    config: &DrivingConfig,
    rng: &mut R,
) -> Result<Pose, EnvError> {
    let (x, y) = spawn_position(map, config, rng)?;
    Ok(Pose {
        x,
        y,
        heading: map.longest_ray_heading(x, y, &config.rays),
    })
}

pub fn reset<R: Rng + ?Sized>(
    map: &ObstacleMap,
    config: &DrivingConfig,
    rng: &mut R,
) -> Result<(Pose, SdcObservation), EnvError> {
    let (x, y) = spawn_position(map, config, rng)?;
    let heading = match config.start_heading {
        StartHeading::LongestRay => map.longest_ray_heading(x, y, &config.rays),
        StartHeading::Random => {
            let step = 360.0 / config.rays.count as f64;
            rng.random_range(0..config.rays.count) as f64 * step
        }
    };
    let velocity_level = match config.start_velocity {
        StartVelocity::Random => rng.random_range(0..VELOCITY_LEVELS) as u8,
        StartVelocity::LowerLimit => 0,
    };
    let pose = Pose { x, y, heading };
    let observation = SdcObservation {
        sensors: sense(&pose, map, &config.probes),
        velocity_level,
    };
    Ok((pose, observation))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveStep {
    pub pose: Pose,
    pub velocity_level: u8,
    pub reward: f64,
    pub collided: bool,
}

/// Applies the action, then moves `v · dt` along the new heading.
pub fn step(
    pose: Pose,
    velocity_level: u8,
    action: SdcAction,
    map: &ObstacleMap,
    config: &DrivingConfig,
) -> DriveStep {
    let top = (VELOCITY_LEVELS - 1) as u8;
    let mut heading = pose.heading;
    let level = match action {
        SdcAction::Accelerate => velocity_level.saturating_add(1).min(top),
        SdcAction::Decelerate => velocity_level.saturating_sub(1),
        SdcAction::TurnLeft => {
            heading += config.turn_deg;
            velocity_level
        }
        SdcAction::TurnRight => {
            heading -= config.turn_deg;
            velocity_level
        }
        SdcAction::Nothing => velocity_level,
    };
    let heading = heading.rem_euclid(360.0);
    let velocity = MIN_VELOCITY + VELOCITY_STEP * level as f64;
    let (sin, cos) = heading.to_radians().sin_cos();
    let next = Pose {
        x: pose.x + velocity * config.dt * cos,
        y: pose.y + velocity * config.dt * sin,
        heading,
    };
    let collided = map.collides(next.x, next.y, config.car_radius);
    DriveStep {
        pose: next,
        velocity_level: level,
        reward: if collided { COLLISION_PENALTY } else { velocity },
        collided,
    }
}

pub struct SelfDrivingCar {
    config: DrivingConfig,
    map: Arc<ObstacleMap>,
    pose: Pose,
    observation: SdcObservation,
    schema: Schema,
}

impl SelfDrivingCar {
    pub fn new(config: DrivingConfig, map: Arc<ObstacleMap>) -> Self {
        let pose = Pose {
            x: map.width_m / 2.0,
            y: map.height_m / 2.0,
            heading: 0.0,
        };
        let observation = SdcObservation {
            sensors: sense(&pose, &map, &config.probes),
            velocity_level: 0,
        };
        SelfDrivingCar {
            config,
            map,
            pose,
            observation,
            schema: schema(),
        }
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn observation(&self) -> SdcObservation {
        self.observation
    }

    pub fn map(&self) -> &ObstacleMap {
        &self.map
    }

    pub fn config(&self) -> &DrivingConfig {
        &self.config
    }

    pub fn place(&mut self, pose: Pose, velocity_level: u8) {
        self.pose = pose;
        self.observation = SdcObservation {
            sensors: sense(&pose, &self.map, &self.config.probes),
            velocity_level,
        };
    }
}

impl Environment for SelfDrivingCar {
    fn kind(&self) -> EnvKind {
        EnvKind::SelfDrivingCar
    }

    fn schema(&self) -> &Schema {
        &self.schema
    }

    fn state_count(&self) -> usize {
        OBSERVATION_COUNT
    }

    fn max_steps(&self) -> usize {
        self.config.max_steps
    }

    fn reset(&mut self, rng: &mut SimRng) -> Result<(), EnvError> {
        let (pose, observation) = reset(&self.map, &self.config, rng)?;
        self.pose = pose;
        self.observation = observation;
        Ok(())
    }

    fn step(&mut self, action: ActionId, rng: &mut SimRng) -> Result<StepOutcome, EnvError> {
        let action = SdcAction::from_id(action)?;
        let result = step(
            self.pose,
            self.observation.velocity_level,
            action,
            &self.map,
            &self.config,
        );
        let terminal = match (result.collided, self.config.collision_mode) {
            (true, CollisionMode::RespawnInEpisode) => {
                let pose = respawn(&self.map, &self.config, rng)?;
                self.place(pose, 0);
                false
            }
            (collided, _) => {
                self.place(result.pose, result.velocity_level);
                collided
            }
        };
        Ok(StepOutcome {
            reward: result.reward,
            terminal,
            collided: result.collided,
        })
    }

    fn state_id(&self) -> Result<StateId, EnvError> {
        Ok(self.observation.encode())
    }

    fn case(&self) -> Case {
        self.observation.case(&self.schema)
    }
}
