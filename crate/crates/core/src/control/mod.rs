//! Flight control: filtered PID, direct MRAC with an SHL network, and the
//! two-loop maneuver controllers built from them.

pub mod lyapunov;
pub mod maneuver;
pub mod mrac;
pub mod pid;
pub mod shl;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lyapunov::{lyapunov_residual, solve_lyapunov};
pub use maneuver::{
    attitude_inner_loop, position_outer_loop, AttitudeSetpoint, ControlOutput, FlightReference, InnerPid,
    ManeuverController, OuterLoop,
};
pub use mrac::{mrac_adapt, mrac_control, AdaptationRates, DriftStatus, MracState, ReferenceModel};
pub use pid::{pid_step, Pid, PidGains, PidState};
pub use shl::{shl_forward, shl_update, ShlNetwork, ShlRates};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("matrix is not Hurwitz (largest eigenvalue real part {abscissa})")]
    NotHurwitz { abscissa: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid controller parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    #[default]
    Pid,
    Mrac,
}

impl ControllerKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Pid => "pid",
            Self::Mrac => "mrac",
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pid" => Ok(Self::Pid),
            "mrac" => Ok(Self::Mrac),
            other => Err(format!("unknown controller '{other}', expected pid or mrac")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MracParams {
    /// Learning rate for the feedback and feedforward gains.
    pub gamma_k: f64,
    pub gamma_w: f64,
    pub gamma_v: f64,
    pub neurons: usize,
    /// Diagonal of Q over `[roll, roll rate, pitch, pitch rate, yaw, yaw rate]`.
    pub q_diag: [f64; 6],
    /// Reference-model natural frequency (rad/s).
    pub wn: f64,
    pub zeta: f64,
    /// e-modification coefficient.
    pub kappa: f64,
    /// Half-width of the uniform inner-weight initialization.
    pub weight_init: f64,
    /// Parameter norm above which a drift warning is logged.
    pub drift_bound: f64,
}

impl Default for MracParams {
    fn default() -> Self {
        Self {
            gamma_k: 110.0,
            gamma_w: 5.0,
            gamma_v: 1.0,
            neurons: shl::DEFAULT_NEURONS,
            q_diag: [125.0, 200.0, 125.0, 200.0, 120.0, 125.0],
            wn: 4.0,
            zeta: 1.0,
            kappa: 0.01,
            weight_init: 0.1,
            drift_bound: 1e3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerParams {
    pub thrust: PidGains,
    pub roll: PidGains,
    pub pitch: PidGains,
    pub yaw: PidGains,
    /// Horizontal position PID; output is an acceleration demand (m/s^2).
    pub position: PidGains,
    /// Vertical acceleration (m/s^2) per unit of thrust PID output.
    pub thrust_scale: f64,
    /// Angular acceleration (rad/s^2) per unit of attitude PID output.
    pub attitude_scale: [f64; 3],
    /// Roll and pitch setpoint limit (degrees).
    pub max_tilt_deg: f64,
    /// Natural frequency of the critically damped prefilter on the PID
    /// attitude setpoints (rad/s).
    pub setpoint_filter_wn: f64,
    pub position_integrator_limit: f64,
    pub thrust_integrator_limit: f64,
    pub attitude_integrator_limit: f64,
    pub mrac: MracParams,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            thrust: PidGains::THRUST,
            roll: PidGains::ROLL,
            pitch: PidGains::PITCH,
            yaw: PidGains::YAW,
            position: PidGains::new(1.5, 0.2, 2.0, 50.0),
            thrust_scale: 200.0,
            attitude_scale: [1.0, 1.0, 30.0],
            max_tilt_deg: 20.0,
            setpoint_filter_wn: 10.0,
            position_integrator_limit: 10.0,
            thrust_integrator_limit: 1.0,
            attitude_integrator_limit: 1.0,
            mrac: MracParams::default(),
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<(), ControlError> {
        for g in [&self.thrust, &self.roll, &self.pitch, &self.yaw, &self.position] {
            g.validate()?;
        }
        let positive = [
            ("thrust_scale", self.thrust_scale),
            ("setpoint_filter_wn", self.setpoint_filter_wn),
            ("attitude_scale[0]", self.attitude_scale[0]),
            ("attitude_scale[1]", self.attitude_scale[1]),
            ("attitude_scale[2]", self.attitude_scale[2]),
            ("position_integrator_limit", self.position_integrator_limit),
            ("thrust_integrator_limit", self.thrust_integrator_limit),
            ("attitude_integrator_limit", self.attitude_integrator_limit),
            ("mrac.wn", self.mrac.wn),
            ("mrac.zeta", self.mrac.zeta),
            ("mrac.drift_bound", self.mrac.drift_bound),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ControlError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.max_tilt_deg > 0.0 && self.max_tilt_deg < 90.0) {
            return Err(ControlError::InvalidParams(format!(
                "max_tilt_deg must lie in (0, 90), got {}",
                self.max_tilt_deg
            )));
        }
        let m = &self.mrac;
        let rates = [m.gamma_k, m.gamma_w, m.gamma_v, m.kappa, m.weight_init];
        if rates.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || m.neurons == 0 {
            return Err(ControlError::InvalidParams(
                "MRAC learning rates must be non-negative and neurons > 0".into(),
            ));
        }
        if m.q_diag.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(ControlError::InvalidParams("MRAC Q diagonal must be positive".into()));
        }
        Ok(())
    }
}
