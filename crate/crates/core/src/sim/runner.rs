//! Fixed-step scenario execution.

use nalgebra::Vector3;
use thiserror::Error;

use super::config::{ConfigError, ScenarioConfig};
use super::rk4::rk4_step;
use crate::arm_dynamics::{torque_profile, ArmModel, ArmState, TorqueProfile};
use crate::control::{ControllerKind, FlightReference, ManeuverController};
use crate::kinematics::{inverse_kinematics, wrap_signed, IkTarget};
use crate::quadcopter::{
    arm_reaction_wrench, quad_dynamics_unchecked, ArmMount, Attitude, RigidBodyState, VehicleParams, SINGULARITY_MARGIN,
};
use crate::trajectory::{generate_reference, ReferenceTrajectory};

/// Length of the combined vehicle + arm state.
pub const STATE_LEN: usize = 18;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    ConfigInvalid(#[from] ConfigError),
    #[error("simulation diverged at t = {t} s: {what}")]
    NonFiniteState { t: f64, what: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimEventKind {
    PayloadAttached {
        mass: f64,
    },
    PayloadReleased {
        mass: f64,
    },
    ArmProfileStarted,
    ArmProfileFinished,
    /// Adaptive parameters crossed the configured bound.
    AdaptiveDrift {
        norm: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimEvent {
    pub step: usize,
    pub t: f64,
    pub kind: SimEventKind,
}

/// State, reference and controller outputs at one grid time, recorded before
/// the step is integrated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub reference: Vector3<f64>,
    pub yaw_ref: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub attitude: Attitude,
    pub setpoint: Vector3<f64>,
    pub collective: f64,
    pub thrusts: [f64; 4],
    pub saturated: bool,
    pub arm_q: Vector3<f64>,
    pub payload_attached: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimLog {
    pub name: String,
    pub controller: ControllerKind,
    pub payload_enabled: bool,
    pub dt: f64,
    pub records: Vec<SimRecord>,
    pub events: Vec<SimEvent>,
}

impl SimLog {
    pub fn new(name: impl Into<String>, controller: ControllerKind, payload_enabled: bool, dt: f64) -> Self {
        Self {
            name: name.into(),
            controller,
            payload_enabled,
            dt,
            records: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn references(&self) -> Vec<Vector3<f64>> {
        self.records.iter().map(|r| r.reference).collect()
    }

    pub fn positions(&self) -> Vec<Vector3<f64>> {
        self.records.iter().map(|r| r.position).collect()
    }
}

/// Everything the plant derivative needs besides the state.
#[derive(Clone, Copy, Debug)]
pub struct Plant {
    pub vehicle: VehicleParams,
    pub arm: ArmModel,
    pub mount: ArmMount,
    pub joint_damping: f64,
}

impl Plant {
    /// Derivative of `[quad (12), q (3), q_dot (3)]` under rotor thrusts,
    /// joint torques and the given payload mass. Singular arm dynamics give
    /// NaN, which the caller treats as divergence.
    pub fn derivative(
        &self,
        x: &[f64; STATE_LEN],
        thrusts: &[f64; 4],
        tau: &Vector3<f64>,
        payload: f64,
    ) -> [f64; STATE_LEN] {
        let quad = RigidBodyState::from_slice(&x[0..12]);
        let arm_state = ArmState {
            q: Vector3::new(x[12], x[13], x[14]),
            qdot: Vector3::new(x[15], x[16], x[17]),
        };
        let arm = self.arm.with_payload(payload);
        let applied = tau - arm_state.qdot * self.joint_damping;
        let Ok(qdd) = arm.equations_of_motion(&arm_state, &applied) else {
            return [f64::NAN; STATE_LEN];
        };
        let wrench = arm_reaction_wrench(&arm_state, &qdd, &arm, &self.mount, &quad.attitude);
        let d = quad_dynamics_unchecked(&quad, thrusts, &wrench, &self.vehicle).to_array();
        let mut out = [0.0; STATE_LEN];
        out[0..12].copy_from_slice(&d);
        out[12..15].copy_from_slice(arm_state.qdot.as_slice());
        out[15..18].copy_from_slice(qdd.as_slice());
        out
    }
}

/// Joint torque schedule that ends in gravity compensation at the arm
/// target for an arm holding `payload` kg, if a target is configured.
pub fn arm_torque_profile(
    config: &ScenarioConfig,
    arm: &ArmModel,
    payload: f64,
) -> Result<Option<TorqueProfile>, ConfigError> {
    let a = &config.arm;
    let Some(target) = a.target else {
        return Ok(None);
    };
    let ik = inverse_kinematics(
        &IkTarget::new(target.radial, 0.0, target.height, target.psi),
        &a.geometry,
        target.branch,
    )
    .map_err(|e| ConfigError::Invalid(format!("arm target: {e}")))?;
    let q = Vector3::from(ik.angles.planar());
    let tau = arm.with_payload(payload).gravity_vector(&q);
    torque_profile(tau, a.rise_duration, config.dt)
        .map(Some)
        .map_err(|e| ConfigError::Invalid(e.to_string()))
}

/// Runs a scenario to completion.
///
/// Every step: apply payload events, step the controller on the current
/// state, record, then integrate plant and arm with RK4 while thrusts and
/// joint torques are held.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimLog, SimError> {
    config.validate()?;
    let dt = config.dt;
    let trajectory: ReferenceTrajectory =
        generate_reference(&config.waypoints, config.cruise_speed, config.accel_limit, dt)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let duration = config.duration.unwrap_or_else(|| trajectory.duration().max(dt));
    let steps = (duration / dt).round() as usize;

    let arm = ArmModel::from_total_mass(&config.arm.geometry, config.arm.total_mass)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    // The joint servos compensate whatever load the gripper currently holds.
    let profile = arm_torque_profile(config, &arm, 0.0)?;
    let loaded_profile = if config.payload.enabled {
        arm_torque_profile(config, &arm, config.payload.mass)?
    } else {
        None
    };
    let plant = Plant {
        vehicle: config.vehicle,
        arm,
        mount: ArmMount {
            drop: config.arm.geometry.d1,
            azimuth: config.arm.azimuth,
        },
        joint_damping: config.arm.joint_damping,
    };
    let lifted = config.vehicle.mass + arm.link_mass();
    let mut controller =
        ManeuverController::new(config.controller, &config.control, &config.vehicle, lifted, config.seed)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let start = trajectory.samples[0];
    let mut x = [0.0; STATE_LEN];
    x[0..12].copy_from_slice(&RigidBodyState::at_rest(start.position, start.yaw).to_array());
    x[12..15].copy_from_slice(&config.arm.initial_q);

    let payload = config.payload;
    let mut attached = false;
    let mut drifting = false;
    let profile_start_step = (config.arm.profile_start / dt).round() as usize;
    let profile_steps = profile.as_ref().map_or(0, |p| p.series().len());
    let mut log = SimLog::new(config.name.clone(), config.controller, payload.enabled, dt);
    log.records.reserve(steps);

    for k in 0..steps {
        let t = k as f64 * dt;
        let mut event = |kind| log.events.push(SimEvent { step: k, t, kind });
        if payload.enabled {
            let released = payload.release_time.is_some_and(|r| t >= r - 1e-9 * dt);
            if !attached && !released && t >= payload.attach_time - 1e-9 * dt {
                attached = true;
                event(SimEventKind::PayloadAttached { mass: payload.mass });
            } else if attached && released {
                attached = false;
                event(SimEventKind::PayloadReleased { mass: payload.mass });
            }
        }
        if profile.is_some() {
            if k == profile_start_step {
                event(SimEventKind::ArmProfileStarted);
            } else if k == profile_start_step + profile_steps {
                event(SimEventKind::ArmProfileFinished);
            }
        }

        let quad = RigidBodyState::from_slice(&x[0..12]);
        let reference: FlightReference = trajectory.sample(k).into();
        let out = controller.step(&reference, &quad, dt);
        match out.drift {
            Some(norm) if !drifting => {
                drifting = true;
                event(SimEventKind::AdaptiveDrift { norm });
            }
            None => drifting = false,
            _ => {}
        }
        log.records.push(SimRecord {
            t,
            reference: reference.position,
            yaw_ref: reference.yaw,
            position: quad.position,
            velocity: quad.velocity,
            attitude: quad.attitude,
            setpoint: Vector3::new(out.setpoint.roll, out.setpoint.pitch, out.setpoint.yaw),
            collective: out.setpoint.thrust,
            thrusts: out.mix.thrusts,
            saturated: out.mix.saturated,
            arm_q: Vector3::new(x[12], x[13], x[14]),
            payload_attached: attached,
        });

        let active = if attached {
            loaded_profile.as_ref()
        } else {
            profile.as_ref()
        };
        let tau = match active {
            Some(p) if k >= profile_start_step => p.sample((k - profile_start_step) as f64 * dt),
            _ => Vector3::zeros(),
        };
        let m = if attached { payload.mass } else { 0.0 };
        let thrusts = out.mix.thrusts;
        x = rk4_step(|_, s| plant.derivative(s, &thrusts, &tau, m), t, &x, dt);
        x[8] = wrap_signed(x[8]);

        let t_next = t + dt;
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteState {
                t: t_next,
                what: format!("state component {i} is not finite"),
            });
        }
        if x[7].abs() >= std::f64::consts::FRAC_PI_2 - SINGULARITY_MARGIN {
            return Err(SimError::NonFiniteState {
                t: t_next,
                what: format!("pitch {} reached the Euler singularity", x[7]),
            });
        }
    }
    Ok(log)
}
