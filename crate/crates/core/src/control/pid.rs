//! Parallel PID with a first-order filtered derivative,
//! `U(s) = Kp + Ki/s + Kd N s/(s + N)`.
//!
//! The integrator is forward Euler and the derivative filter is backward
//! Euler:
//!
//! ```text
//! d[k] = (d[k-1] + Kd N (e[k] - e[k-1])) / (1 + N dt)
//! ```

use serde::{Deserialize, Serialize};

use super::ControlError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Derivative filter coefficient (1/s).
    pub n: f64,
}

impl PidGains {
    pub const THRUST: Self = Self::new(0.25, 0.05, 0.35, 10000.0);
    pub const ROLL: Self = Self::new(100.0, 0.0, 800.0, 1000.0);
    pub const PITCH: Self = Self::new(100.0, 0.0, 800.0, 1000.0);
    pub const YAW: Self = Self::new(205.61, 0.059203, 0.782, 100.0);

    pub const fn new(kp: f64, ki: f64, kd: f64, n: f64) -> Self {
        Self { kp, ki, kd, n }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let finite = [self.kp, self.ki, self.kd, self.n].iter().all(|v| v.is_finite());
        if !finite || self.n <= 0.0 {
            return Err(ControlError::InvalidParams(format!(
                "PID gains must be finite with n > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PidState {
    pub integrator: f64,
    pub filter_state: f64,
    pub last_error: f64,
}

impl PidState {
    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// One controller step. The integrator is clamped to `+-integrator_limit`.
pub fn pid_step(gains: &PidGains, state: &mut PidState, error: f64, dt: f64, integrator_limit: f64) -> f64 {
    debug_assert!(dt > 0.0);
    state.integrator = (state.integrator + error * dt).clamp(-integrator_limit, integrator_limit);
    state.filter_state = (state.filter_state + gains.kd * gains.n * (error - state.last_error)) / (1.0 + gains.n * dt);
    state.last_error = error;
    gains.kp * error + gains.ki * state.integrator + state.filter_state
}

/// Gains, anti-windup bound and state bundled together.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pid {
    pub gains: PidGains,
    pub integrator_limit: f64,
    pub state: PidState,
}

impl Pid {
    pub fn new(gains: PidGains, integrator_limit: f64) -> Self {
        Self {
            gains,
            integrator_limit,
            state: PidState::default(),
        }
    }

    pub fn step(&mut self, error: f64, dt: f64) -> f64 {
        pid_step(&self.gains, &mut self.state, error, dt, self.integrator_limit)
    }

    pub fn reset(&mut self) {
        self.state.reset();
    }
}
