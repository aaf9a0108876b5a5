//! Rectangular obstacle maps for the driving task.
//!
//! The world spans `[0, width_m] × [0, height_m]` with implicit outer walls.
//! Files are JSON: `{"width_m": 60, "height_m": 60, "obstacles": [{"x":..,"y":..,"w":..,"h":..}]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EnvError;

/// Axis-aligned rectangle with its lower-left corner at `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x && px <= self.x + self.w && py >= self.y && py <= self.y + self.h
    }

    /// Distance from a point to the rectangle (zero inside).
    pub fn distance(&self, px: f64, py: f64) -> f64 {
        let dx = (self.x - px).max(0.0).max(px - (self.x + self.w));
        let dy = (self.y - py).max(0.0).max(py - (self.y + self.h));
        dx.hypot(dy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleMap {
    pub width_m: f64,
    pub height_m: f64,
    pub obstacles: Vec<Rect>,
}

const DEFAULT_MAP: &str = include_str!("../../assets/maps/default.json");

/// Ray-marching parameters used when picking a respawn heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RayConfig {
    pub count: usize,
    pub step_m: f64,
    pub max_m: f64,
}

impl Default for RayConfig {
    fn default() -> Self {
        RayConfig {
            count: 72,
            step_m: 0.1,
            max_m: 100.0,
        }
    }
}

impl ObstacleMap {
    /// Corridors along the top, right and bottom edges around a central block,
    /// and an open area on the left split into two sections.
    pub fn default_map() -> Self {
        ObstacleMap::from_json(DEFAULT_MAP).expect("bundled map is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        let map: ObstacleMap =
            serde_json::from_str(text).map_err(|e| EnvError::InvalidMap(e.to_string()))?;
        map.validate()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, EnvError> {
        let text = std::fs::read_to_string(path).map_err(|e| EnvError::MapIo {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        ObstacleMap::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let finite = |v: f64| v.is_finite();
        if !(finite(self.width_m) && finite(self.height_m))
            || self.width_m <= 0.0
            || self.height_m <= 0.0
        {
            return Err(EnvError::InvalidMap("world extents must be positive".into()));
        }
        for (i, r) in self.obstacles.iter().enumerate() {
            if ![r.x, r.y, r.w, r.h].into_iter().all(finite) {
                return Err(EnvError::InvalidMap(format!("obstacle {i} is not finite")));
            }
            if r.w < 0.0 || r.h < 0.0 {
                return Err(EnvError::InvalidMap(format!("obstacle {i} has a negative extent")));
            }
            if r.x < 0.0 || r.y < 0.0 || r.x + r.w > self.width_m || r.y + r.h > self.height_m {
                return Err(EnvError::InvalidMap(format!("obstacle {i} lies outside the world")));
            }
        }
        Ok(())
    }

    /// Whether a probe point hits an obstacle or lies outside the world.
    pub fn blocked(&self, x: f64, y: f64) -> bool {
        x < 0.0
            || y < 0.0
            || x > self.width_m
            || y > self.height_m
            || self.obstacles.iter().any(|r| r.contains(x, y))
    }

    /// Whether a disc of `radius` around `(x, y)` overlaps an obstacle or a wall.
    pub fn collides(&self, x: f64, y: f64, radius: f64) -> bool {
        x - radius < 0.0
            || y - radius < 0.0
            || x + radius > self.width_m
            || y + radius > self.height_m
            || self.obstacles.iter().any(|r| r.distance(x, y) < radius)
    }

    /// Marches from `(x, y)` along `heading_deg` and returns the distance of
    /// the last free sample, capped at `max_m`.
    pub fn ray_distance(&self, x: f64, y: f64, heading_deg: f64, rays: &RayConfig) -> f64 {
        let (sin, cos) = heading_deg.to_radians().sin_cos();
        let steps = (rays.max_m / rays.step_m).floor() as usize;
        for k in 1..=steps {
            let d = k as f64 * rays.step_m;
            if self.blocked(x + d * cos, y + d * sin) {
                return (k - 1) as f64 * rays.step_m;
            }
        }
        steps as f64 * rays.step_m
    }

    /// Heading (degrees) of the longest ray among `rays.count` evenly spaced
    /// directions; ties go to the smallest angle.
    pub fn longest_ray_heading(&self, x: f64, y: f64, rays: &RayConfig) -> f64 {
        let step = 360.0 / rays.count as f64;
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..rays.count {
            let heading = i as f64 * step;
            let d = self.ray_distance(x, y, heading, rays);
            if d > best.1 {
                best = (heading, d);
            }
        }
        best.0
    }

    /// Whether some grid point has clearance `radius`, scanning at `resolution`.
    pub fn has_free_space(&self, radius: f64, resolution: f64) -> bool {
        let nx = (self.width_m / resolution).ceil() as usize;
        let ny = (self.height_m / resolution).ceil() as usize;
        (0..=nx).any(|i| {
            (0..=ny).any(|j| !self.collides(i as f64 * resolution, j as f64 * resolution, radius))
        })
    }
}
