//! Node position over time: static, circular, or waypoint paths on a 2-D
//! plane. Positions are pure functions of (path, t); the simulation samples
//! them at a configurable tick.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MobilityError {
    #[error("circular path radius must be > 0 (got {0})")]
    NonPositiveRadius(f64),
    #[error("circular path angular_speed must be non-zero")]
    ZeroAngularSpeed,
    #[error("waypoint path needs at least one waypoint")]
    EmptyWaypoints,
    #[error("waypoint arrival times must be strictly increasing")]
    NonIncreasingWaypoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Path {
    Static {
        x: f64,
        y: f64,
    },
    Circular {
        center_x: f64,
        center_y: f64,
        radius_m: f64,
        /// Signed, radians per second. Negative is clockwise.
        angular_speed_rad_s: f64,
        start_angle_rad: f64,
    },
    /// Linear interpolation between `(x, y, arrival_time_s)` points, clamped
    /// at both ends.
    Waypoints { points: Vec<(f64, f64, f64)> },
}

impl Path {
    pub fn validate(&self) -> Result<(), MobilityError> {
        match self {
            Path::Static { .. } => Ok(()),
            Path::Circular {
                radius_m,
                angular_speed_rad_s,
                ..
            } => {
                if *radius_m <= 0.0 {
                    return Err(MobilityError::NonPositiveRadius(*radius_m));
                }
                if *angular_speed_rad_s == 0.0 {
                    return Err(MobilityError::ZeroAngularSpeed);
                }
                Ok(())
            }
            Path::Waypoints { points } => {
                if points.is_empty() {
                    return Err(MobilityError::EmptyWaypoints);
                }
                if points.windows(2).any(|w| w[1].2 <= w[0].2) {
                    return Err(MobilityError::NonIncreasingWaypoints);
                }
                Ok(())
            }
        }
    }

    /// Position at time `t` (seconds, `t >= 0`).
    pub fn position_at(&self, t: f64) -> Position {
        match self {
            Path::Static { x, y } => Position::new(*x, *y),
            Path::Circular {
                center_x,
                center_y,
                radius_m,
                angular_speed_rad_s,
                start_angle_rad,
            } => {
                let angle = start_angle_rad + angular_speed_rad_s * t;
                Position::new(
                    center_x + radius_m * angle.cos(),
                    center_y + radius_m * angle.sin(),
                )
            }
            Path::Waypoints { points } => {
                let first = points.first().expect("validated non-empty");
                if t <= first.2 {
                    return Position::new(first.0, first.1);
                }
                for w in points.windows(2) {
                    let (x0, y0, t0) = w[0];
                    let (x1, y1, t1) = w[1];
                    if t <= t1 {
                        let frac = (t - t0) / (t1 - t0);
                        return Position::new(x0 + (x1 - x0) * frac, y0 + (y1 - y0) * frac);
                    }
                }
                let last = points.last().expect("validated non-empty");
                Position::new(last.0, last.1)
            }
        }
    }
}
