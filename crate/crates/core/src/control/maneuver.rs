//! Two-loop maneuver control.
//!
//! The outer loop turns position error into a thrust magnitude and roll/pitch
//! setpoints. The inner loop turns attitude error into body moments, either
//! with per-axis PID or with per-axis MRAC. Thrust always uses PID.
//!
//! Attitude loops output angular-acceleration demands which are scaled by the
//! axis inertia to give moments. Sign convention per axis: a positive error
//! (setpoint above the measured angle) commands a positive moment about the
//! same body axis.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lyapunov::solve_lyapunov;
use super::mrac::{mrac_adapt, mrac_control, AdaptationRates, DriftStatus, MracState, ReferenceModel};
use super::pid::Pid;
use super::shl::{shl_update, ShlNetwork, ShlRates};
use super::{ControlError, ControllerKind, ControllerParams};
use crate::arm_dynamics::GRAVITY;
use crate::kinematics::wrap_signed;
use crate::quadcopter::{MixOutput, MotorMixer, RigidBodyState, VehicleParams};

/// Reference sample consumed by the outer loop (world frame).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FlightReference {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub yaw: f64,
}

impl FlightReference {
    pub fn hold(position: Vector3<f64>, yaw: f64) -> Self {
        Self {
            position,
            yaw,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AttitudeSetpoint {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Collective thrust (N).
    pub thrust: f64,
}

/// Position PIDs for x, y (acceleration demand) and z (thrust row).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterLoop {
    pub x: Pid,
    pub y: Pid,
    pub z: Pid,
}

impl OuterLoop {
    pub fn new(params: &ControllerParams) -> Self {
        Self {
            x: Pid::new(params.position, params.position_integrator_limit),
            y: Pid::new(params.position, params.position_integrator_limit),
            z: Pid::new(params.thrust, params.thrust_integrator_limit),
        }
    }
}

/// Outer loop: small-angle inversion of the thrust direction.
///
/// `mass` is the mass the controller believes it is lifting.
pub fn position_outer_loop(
    reference: &FlightReference,
    state: &RigidBodyState,
    outer: &mut OuterLoop,
    params: &ControllerParams,
    mass: f64,
    dt: f64,
) -> AttitudeSetpoint {
    let err = reference.position - state.position;
    let ax = reference.acceleration.x + outer.x.step(err.x, dt);
    let ay = reference.acceleration.y + outer.y.step(err.y, dt);
    let az = reference.acceleration.z + params.thrust_scale * outer.z.step(err.z, dt);
    let lift = (GRAVITY + az).max(0.1 * GRAVITY);
    let (sy, cy) = state.attitude.yaw.sin_cos();
    let fwd = cy * ax + sy * ay;
    let left = -sy * ax + cy * ay;
    let max_tilt = params.max_tilt_deg.to_radians();
    let pitch = (fwd / lift).atan().clamp(-max_tilt, max_tilt);
    let roll = (-left * pitch.cos() / lift).atan().clamp(-max_tilt, max_tilt);
    let tilt = (state.attitude.roll.cos() * state.attitude.pitch.cos()).max(0.5);
    AttitudeSetpoint {
        roll,
        pitch,
        yaw: reference.yaw,
        thrust: mass * lift / tilt,
    }
}

fn attitude_errors(setpoint: &AttitudeSetpoint, state: &RigidBodyState) -> Vector3<f64> {
    let a = state.attitude;
    Vector3::new(
        setpoint.roll - a.roll,
        setpoint.pitch - a.pitch,
        wrap_signed(setpoint.yaw - a.yaw),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerPid {
    pub roll: Pid,
    pub pitch: Pid,
    pub yaw: Pid,
}

impl InnerPid {
    pub fn new(params: &ControllerParams) -> Self {
        let lim = params.attitude_integrator_limit;
        Self {
            roll: Pid::new(params.roll, lim),
            pitch: Pid::new(params.pitch, lim),
            yaw: Pid::new(params.yaw, lim),
        }
    }
}

/// Per-axis attitude PID. Returns body moments (N m).
pub fn attitude_inner_loop(
    setpoint: &AttitudeSetpoint,
    state: &RigidBodyState,
    inner: &mut InnerPid,
    params: &ControllerParams,
    inertia: &[f64; 3],
    dt: f64,
) -> Vector3<f64> {
    let e = attitude_errors(setpoint, state);
    let u = [
        inner.roll.step(e[0], dt),
        inner.pitch.step(e[1], dt),
        inner.yaw.step(e[2], dt),
    ];
    Vector3::from_fn(|i, _| inertia[i] * params.attitude_scale[i] * u[i])
}

/// One MRAC channel on `(angle, rate)` with a second-order reference model.
#[derive(Clone, Debug, PartialEq)]
pub struct MracChannel {
    pub model: ReferenceModel,
    pub gains: MracState,
    pub network: ShlNetwork,
    b: DVector<f64>,
    b_matrix: DMatrix<f64>,
    rates: AdaptationRates,
    shl_rates: ShlRates,
}

impl MracChannel {
    /// Feedback and feedforward start at the values that match the model
    /// for a unit-gain double integrator.
    pub fn new(model: ReferenceModel, p: DMatrix<f64>, network: ShlNetwork, params: &ControllerParams) -> Self {
        let a = model.a_m();
        let bm = model.b_m()[1];
        let kx = DVector::from_vec(vec![a[(1, 0)], a[(1, 1)]]);
        let m = &params.mrac;
        Self {
            model,
            gains: MracState::new(kx, bm, DVector::zeros(0), p, m.drift_bound),
            network,
            b: DVector::from_vec(vec![0.0, 1.0]),
            b_matrix: DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
            rates: AdaptationRates::uniform(m.gamma_k),
            shl_rates: ShlRates {
                gamma_w: m.gamma_w,
                gamma_v: m.gamma_v,
                kappa: m.kappa,
            },
        }
    }

    /// Angular-acceleration demand; adapts and advances the model by `dt`.
    pub fn step(&mut self, angle: f64, rate: f64, r: f64, dt: f64) -> (f64, DriftStatus) {
        let x = DVector::from_vec(vec![angle, rate]);
        let e = &x - &self.model.state;
        let phi_hat = self.network.forward(&x)[0];
        let empty = DVector::zeros(0);
        let u = mrac_control(&x, r, &self.gains, &empty) - phi_hat;
        let status = mrac_adapt(&mut self.gains, &x, r, &empty, &e, &self.b, &self.rates, dt);
        shl_update(
            &mut self.network,
            &e,
            &x,
            &self.gains.p,
            &self.b_matrix,
            &self.shl_rates,
            dt,
        );
        self.model.step(r, dt);
        let norm = self.parameter_norm();
        let status = match status {
            DriftStatus::Bounded if norm > self.gains.drift_bound || !norm.is_finite() => {
                DriftStatus::BoundedDrift { norm }
            }
            s => s,
        };
        (u, status)
    }

    pub fn parameter_norm(&self) -> f64 {
        self.gains.parameter_norm().hypot(self.network.norm())
    }
}

/// Solves the stacked six-state Lyapunov equation once and splits the
/// block-diagonal solution into per-axis 2x2 blocks.
pub fn stacked_lyapunov(models: &[ReferenceModel; 3], q_diag: &[f64; 6]) -> Result<[DMatrix<f64>; 3], ControlError> {
    let mut a = DMatrix::zeros(6, 6);
    for (k, m) in models.iter().enumerate() {
        a.view_mut((2 * k, 2 * k), (2, 2)).copy_from(m.a_m());
    }
    let q = DMatrix::from_diagonal(&DVector::from_column_slice(q_diag));
    let p = solve_lyapunov(&a, &q)?;
    Ok(std::array::from_fn(|k| p.view((2 * k, 2 * k), (2, 2)).into_owned()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MracAttitude {
    pub channels: [MracChannel; 3],
}

impl MracAttitude {
    pub fn new(params: &ControllerParams, seed: u64) -> Result<Self, ControlError> {
        let m = &params.mrac;
        let models: [ReferenceModel; 3] = [
            ReferenceModel::second_order(m.wn, m.zeta)?,
            ReferenceModel::second_order(m.wn, m.zeta)?,
            ReferenceModel::second_order(m.wn, m.zeta)?,
        ];
        let p = stacked_lyapunov(&models, &m.q_diag)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [m0, m1, m2] = models;
        let [p0, p1, p2] = p;
        let mut channel = |model, p| {
            let net = ShlNetwork::random(2, m.neurons, 1, m.weight_init, &mut rng);
            MracChannel::new(model, p, net, params)
        };
        let channels = [channel(m0, p0), channel(m1, p1), channel(m2, p2)];
        Ok(Self { channels })
    }

    /// Body moments (N m) and the worst drift status over the axes.
    pub fn step(
        &mut self,
        setpoint: &AttitudeSetpoint,
        state: &RigidBodyState,
        inertia: &[f64; 3],
        dt: f64,
    ) -> (Vector3<f64>, Option<f64>) {
        let a = state.attitude;
        let w = state.body_rates;
        let yaw = setpoint.yaw + wrap_signed(a.yaw - setpoint.yaw);
        let angles = [a.roll, a.pitch, yaw];
        let refs = [setpoint.roll, setpoint.pitch, setpoint.yaw];
        let mut moments = Vector3::zeros();
        let mut drift = None;
        for k in 0..3 {
            let (u, status) = self.channels[k].step(angles[k], w[k], refs[k], dt);
            moments[k] = inertia[k] * u;
            if let DriftStatus::BoundedDrift { norm } = status {
                drift = Some(drift.map_or(norm, |d: f64| d.max(norm)));
            }
        }
        (moments, drift)
    }
}

/// Critically damped second-order prefilter on roll, pitch and yaw
/// setpoints. Yaw is filtered on the unwrapped angle.
#[derive(Clone, Debug, PartialEq)]
pub struct SetpointShaper {
    filters: [ReferenceModel; 3],
    primed: bool,
}

impl SetpointShaper {
    pub fn new(wn: f64) -> Result<Self, ControlError> {
        let f = ReferenceModel::second_order(wn, 1.0)?;
        Ok(Self {
            filters: [f.clone(), f.clone(), f],
            primed: false,
        })
    }

    pub fn step(&mut self, sp: &AttitudeSetpoint, dt: f64) -> AttitudeSetpoint {
        let raw = [sp.roll, sp.pitch, sp.yaw];
        if !self.primed {
            for (f, r) in self.filters.iter_mut().zip(raw) {
                f.reset(DVector::from_vec(vec![r, 0.0]));
            }
            self.primed = true;
        }
        let yaw_prev = self.filters[2].state[0];
        let targets = [raw[0], raw[1], yaw_prev + wrap_signed(raw[2] - yaw_prev)];
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = self.filters[k].step(targets[k], dt)[0];
        }
        AttitudeSetpoint {
            roll: out[0],
            pitch: out[1],
            yaw: wrap_signed(out[2]),
            thrust: sp.thrust,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum InnerLoop {
    Pid(InnerPid, SetpointShaper),
    Mrac(Box<MracAttitude>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlOutput {
    pub setpoint: AttitudeSetpoint,
    pub moments: Vector3<f64>,
    pub mix: MixOutput,
    /// Adaptive parameter norm when it exceeded the drift bound this step.
    pub drift: Option<f64>,
}

/// Full controller: outer position loop, inner attitude loop, motor mixer.
#[derive(Clone, Debug, PartialEq)]
pub struct ManeuverController {
    pub kind: ControllerKind,
    pub params: ControllerParams,
    pub outer: OuterLoop,
    pub inner: InnerLoop,
    mixer: MotorMixer,
    inertia: [f64; 3],
    mass: f64,
}

impl ManeuverController {
    /// `mass` is the lifted mass the controller assumes for hover trim.
    pub fn new(
        kind: ControllerKind,
        params: &ControllerParams,
        vehicle: &VehicleParams,
        mass: f64,
        seed: u64,
    ) -> Result<Self, ControlError> {
        params.validate()?;
        let inner = match kind {
            ControllerKind::Pid => {
                InnerLoop::Pid(InnerPid::new(params), SetpointShaper::new(params.setpoint_filter_wn)?)
            }
            ControllerKind::Mrac => InnerLoop::Mrac(Box::new(MracAttitude::new(params, seed)?)),
        };
        Ok(Self {
            kind,
            params: params.clone(),
            outer: OuterLoop::new(params),
            inner,
            mixer: MotorMixer::new(vehicle),
            inertia: vehicle.inertia,
            mass,
        })
    }

    pub fn assumed_mass(&self) -> f64 {
        self.mass
    }

    pub fn step(&mut self, reference: &FlightReference, state: &RigidBodyState, dt: f64) -> ControlOutput {
        let setpoint = position_outer_loop(reference, state, &mut self.outer, &self.params, self.mass, dt);
        let (moments, drift) = match &mut self.inner {
            InnerLoop::Pid(pid, shaper) => {
                let shaped = shaper.step(&setpoint, dt);
                (
                    attitude_inner_loop(&shaped, state, pid, &self.params, &self.inertia, dt),
                    None,
                )
            }
            InnerLoop::Mrac(mrac) => mrac.step(&setpoint, state, &self.inertia, dt),
        };
        let mix = self.mixer.mix(setpoint.thrust, moments.x, moments.y, moments.z);
        ControlOutput {
            setpoint,
            moments,
            mix,
            drift,
        }
    }
}
