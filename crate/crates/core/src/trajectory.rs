//! Waypoint reference trajectories with trapezoidal speed profiles.
//!
//! The path visits the waypoints in order along straight lines, holding at
//! each one for its `hold_time`. Yaw is interpolated linearly in path length
//! along the shorter arc.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::FlightReference;
use crate::kinematics::wrap_signed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("waypoint list is empty")]
    EmptyWaypointList,
    #[error("invalid trajectory parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub hold_time: f64,
}

impl Waypoint {
    pub fn new(position: [f64; 3], yaw: f64, hold_time: f64) -> Self {
        Self {
            position,
            yaw,
            hold_time,
        }
    }

    pub fn point(&self) -> Vector3<f64> {
        Vector3::from(self.position)
    }

    fn validate(&self) -> Result<(), TrajectoryError> {
        let finite = self.position.iter().all(|v| v.is_finite()) && self.yaw.is_finite() && self.hold_time.is_finite();
        if !finite || self.hold_time < 0.0 {
            return Err(TrajectoryError::InvalidParams(format!(
                "waypoints need finite values and a non-negative hold time, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Speed profile over one straight segment of length `distance`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trapezoid {
    pub distance: f64,
    pub peak_speed: f64,
    pub accel: f64,
    pub t_accel: f64,
    pub t_cruise: f64,
}

impl Trapezoid {
    /// `accel = None` gives an instantaneous jump to cruise speed.
    pub fn new(distance: f64, cruise_speed: f64, accel: Option<f64>) -> Self {
        match accel {
            None => Self {
                distance,
                peak_speed: cruise_speed,
                accel: f64::INFINITY,
                t_accel: 0.0,
                t_cruise: distance / cruise_speed,
            },
            Some(a) if distance >= cruise_speed * cruise_speed / a => Self {
                distance,
                peak_speed: cruise_speed,
                accel: a,
                t_accel: cruise_speed / a,
                t_cruise: (distance - cruise_speed * cruise_speed / a) / cruise_speed,
            },
            Some(a) => {
                let t = (distance / a).sqrt();
                Self {
                    distance,
                    peak_speed: a * t,
                    accel: a,
                    t_accel: t,
                    t_cruise: 0.0,
                }
            }
        }
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.t_accel + self.t_cruise
    }

    /// Path length, speed and acceleration at time `t` into the segment.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let total = self.duration();
        if t <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        if t >= total {
            return (self.distance, 0.0, 0.0);
        }
        let (ta, v) = (self.t_accel, self.peak_speed);
        if t < ta {
            (0.5 * self.accel * t * t, self.accel * t, self.accel)
        } else if t <= ta + self.t_cruise {
            let s0 = if ta > 0.0 { 0.5 * self.accel * ta * ta } else { 0.0 };
            (s0 + v * (t - ta), v, 0.0)
        } else {
            let r = total - t;
            (self.distance - 0.5 * self.accel * r * r, self.accel * r, -self.accel)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Segment {
    Hold {
        position: Vector3<f64>,
        yaw: f64,
        duration: f64,
    },
    Move {
        from: Vector3<f64>,
        direction: Vector3<f64>,
        yaw_from: f64,
        yaw_delta: f64,
        profile: Trapezoid,
    },
}

impl Segment {
    fn duration(&self) -> f64 {
        match self {
            Self::Hold { duration, .. } => *duration,
            Self::Move { profile, .. } => profile.duration(),
        }
    }

    fn eval(&self, t: f64) -> (Vector3<f64>, Vector3<f64>, f64) {
        match *self {
            Self::Hold { position, yaw, .. } => (position, Vector3::zeros(), yaw),
            Self::Move {
                from,
                direction,
                yaw_from,
                yaw_delta,
                profile,
            } => {
                let (s, _, a) = profile.eval(t);
                let frac = s / profile.distance;
                (from + direction * s, direction * a, yaw_from + yaw_delta * frac)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReferenceSample {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub yaw: f64,
}

impl From<ReferenceSample> for FlightReference {
    fn from(s: ReferenceSample) -> Self {
        Self {
            position: s.position,
            velocity: s.velocity,
            acceleration: s.acceleration,
            yaw: s.yaw,
        }
    }
}

/// Reference samples on the grid `t_k = k dt`.
///
/// `velocity[k] = (position[k+1] - position[k]) / dt`, so summing the
/// velocities reproduces the positions; the last velocity is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceTrajectory {
    pub dt: f64,
    pub samples: Vec<ReferenceSample>,
}

impl ReferenceTrajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of the last sample.
    pub fn duration(&self) -> f64 {
        (self.samples.len().saturating_sub(1)) as f64 * self.dt
    }

    /// Sample `k`, holding the final sample past the end.
    pub fn sample(&self, k: usize) -> ReferenceSample {
        self.samples[k.min(self.samples.len() - 1)]
    }

    pub fn last(&self) -> ReferenceSample {
        *self.samples.last().expect("trajectories have at least one sample")
    }
}

/// Builds the reference for `waypoints` at sample period `dt`.
///
/// The vehicle starts at the first waypoint. `accel_limit = None` moves at
/// `cruise_speed` from the first sample of each segment.
pub fn generate_reference(
    waypoints: &[Waypoint],
    cruise_speed: f64,
    accel_limit: Option<f64>,
    dt: f64,
) -> Result<ReferenceTrajectory, TrajectoryError> {
    let first = waypoints.first().ok_or(TrajectoryError::EmptyWaypointList)?;
    if !(cruise_speed > 0.0 && cruise_speed.is_finite()) {
        return Err(TrajectoryError::InvalidParams(format!(
            "cruise speed must be positive, got {cruise_speed}"
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(TrajectoryError::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    if let Some(a) = accel_limit {
        if !(a > 0.0 && a.is_finite()) {
            return Err(TrajectoryError::InvalidParams(format!(
                "acceleration limit must be positive, got {a}"
            )));
        }
    }
    for w in waypoints {
        w.validate()?;
    }

    let mut segments = vec![Segment::Hold {
        position: first.point(),
        yaw: first.yaw,
        duration: first.hold_time,
    }];
    for pair in waypoints.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let delta = b.point() - a.point();
        let distance = delta.norm();
        if distance > 0.0 {
            segments.push(Segment::Move {
                from: a.point(),
                direction: delta / distance,
                yaw_from: a.yaw,
                yaw_delta: wrap_signed(b.yaw - a.yaw),
                profile: Trapezoid::new(distance, cruise_speed, accel_limit),
            });
        }
        segments.push(Segment::Hold {
            position: b.point(),
            yaw: b.yaw,
            duration: b.hold_time,
        });
    }

    let total: f64 = segments.iter().map(Segment::duration).sum();
    let last = waypoints.last().expect("non-empty");
    let steps = (total / dt - 1e-9).ceil().max(0.0) as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut seg = 0;
    let mut seg_start = 0.0;
    for k in 0..=steps {
        let t = k as f64 * dt;
        while seg + 1 < segments.len() && t >= seg_start + segments[seg].duration() {
            seg_start += segments[seg].duration();
            seg += 1;
        }
        let (position, acceleration, yaw) = if t >= total {
            (last.point(), Vector3::zeros(), last.yaw)
        } else {
            segments[seg].eval(t - seg_start)
        };
        samples.push(ReferenceSample {
            position,
            velocity: Vector3::zeros(),
            acceleration,
            yaw,
        });
    }
    for k in 0..samples.len().saturating_sub(1) {
        samples[k].velocity = (samples[k + 1].position - samples[k].position) / dt;
    }
    Ok(ReferenceTrajectory { dt, samples })
}
