//! Scenario configuration, read from TOML.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{ControllerKind, ControllerParams};
use crate::kinematics::{ArmGeometry, ElbowBranch};
use crate::quadcopter::VehicleParams;
use crate::trajectory::Waypoint;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PayloadConfig {
    pub enabled: bool,
    pub mass: f64,
    pub attach_time: f64,
    /// Omitted: the payload is never released.
    pub release_time: Option<f64>,
}

impl Default for PayloadConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            mass: 0.512,
            attach_time: 0.0,
            release_time: None,
        }
    }
}

/// Tip target for the arm in its own plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmTarget {
    /// Horizontal distance from the arm base (m).
    pub radial: f64,
    /// Height relative to the arm base (m, negative is below).
    pub height: f64,
    /// Azimuth of the last link (rad).
    pub psi: f64,
    #[serde(default)]
    pub branch: ElbowBranch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmConfig {
    pub geometry: ArmGeometry,
    pub total_mass: f64,
    /// Yaw of the arm plane relative to body x (rad).
    pub azimuth: f64,
    pub initial_q: [f64; 3],
    /// Viscous joint friction (N m s/rad).
    pub joint_damping: f64,
    /// Pose whose static holding torque the profile ramps to. Omitted: the
    /// arm stays passive.
    pub target: Option<ArmTarget>,
    /// Simulation time at which the torque profile starts (s).
    pub profile_start: f64,
    /// Length of the rising half of the profile (s).
    pub rise_duration: f64,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self {
            geometry: ArmGeometry::default(),
            total_mass: 1.92,
            azimuth: 0.0,
            initial_q: [-FRAC_PI_2, 0.0, 0.0],
            joint_damping: 0.3,
            target: None,
            profile_start: 0.0,
            rise_duration: 20.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub controller: ControllerKind,
    /// Plant and controller step (s).
    pub dt: f64,
    /// Omitted: the length of the reference trajectory.
    pub duration: Option<f64>,
    pub seed: u64,
    pub cruise_speed: f64,
    pub accel_limit: Option<f64>,
    pub waypoints: Vec<Waypoint>,
    pub payload: PayloadConfig,
    pub vehicle: VehicleParams,
    pub arm: ArmConfig,
    pub control: ControllerParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            controller: ControllerKind::Pid,
            dt: 1e-3,
            duration: None,
            seed: 0,
            cruise_speed: 1.0,
            accel_limit: Some(1.0),
            waypoints: Vec::new(),
            payload: PayloadConfig::default(),
            vehicle: VehicleParams::default(),
            arm: ArmConfig::default(),
            control: ControllerParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return invalid(format!("dt must lie in (0, 0.01], got {}", self.dt));
        }
        if let Some(d) = self.duration {
            if !(d > 0.0 && d.is_finite()) {
                return invalid(format!("duration must be positive, got {d}"));
            }
        }
        if self.waypoints.is_empty() {
            return invalid("at least one waypoint is required".into());
        }
        let p = &self.payload;
        if !(p.mass >= 0.0 && p.mass.is_finite() && p.attach_time.is_finite()) {
            return invalid(format!("payload mass and attach time must be finite, got {p:?}"));
        }
        if let Some(release) = p.release_time {
            if release.is_nan() || p.attach_time >= release {
                return invalid(format!(
                    "payload attach_time ({}) must precede release_time ({release})",
                    p.attach_time
                ));
            }
        }
        let a = &self.arm;
        a.geometry.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(a.total_mass > 0.0 && a.joint_damping >= 0.0 && a.rise_duration >= 0.0) {
            return invalid("arm mass must be positive and damping, rise duration non-negative".into());
        }
        if a.initial_q
            .iter()
            .chain([&a.azimuth, &a.profile_start])
            .any(|v| !v.is_finite())
        {
            return invalid("arm angles and profile start must be finite".into());
        }
        self.vehicle
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let carried = if p.enabled { p.mass } else { 0.0 };
        self.vehicle
            .check_budget(a.total_mass, carried)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.control
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}
