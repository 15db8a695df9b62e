//! Six-degree-of-freedom quadcopter with an X rotor layout.
//!
//! Frames: the world frame is ENU (z up) and the body frame is FLU (x forward,
//! y left, z up). Attitude is a Z-Y-X Euler triple, `R = Rz(yaw) Ry(pitch)
//! Rx(roll)`, so a positive pitch tilts the nose down and thrust toward +x.
//!
//! Rotors are numbered front-left, front-right, rear-right, rear-left. Rotors
//! 1 and 3 spin so that their drag torque yaws the body positively.

use nalgebra::{Matrix3, Matrix4, Rotation3, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arm_dynamics::{ArmModel, ArmState, GRAVITY};

/// Pitch magnitudes within this distance of `pi/2` are rejected.
pub const SINGULARITY_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("Euler singularity: pitch {pitch} rad is within {SINGULARITY_MARGIN} of +-pi/2")]
    EulerSingularity { pitch: f64 },
    #[error("invalid vehicle parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Attitude {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Attitude {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }

    /// Body-to-world rotation.
    pub fn rotation(&self) -> Matrix3<f64> {
        let (sr, cr) = self.roll.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        Matrix3::new(
            cy * cp,
            cy * sp * sr - sy * cr,
            cy * sp * cr + sy * sr,
            sy * cp,
            sy * sp * sr + cy * cr,
            sy * sp * cr - cy * sr,
            -sp,
            cp * sr,
            cp * cr,
        )
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.roll, self.pitch, self.yaw)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RigidBodyState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub attitude: Attitude,
    pub body_rates: Vector3<f64>,
}

impl RigidBodyState {
    pub fn at_rest(position: Vector3<f64>, yaw: f64) -> Self {
        Self {
            position,
            attitude: Attitude::new(0.0, 0.0, yaw),
            ..Self::default()
        }
    }

    /// Packs as `[position, velocity, (roll, pitch, yaw), body_rates]`.
    pub fn to_array(&self) -> [f64; 12] {
        let a = self.attitude;
        let mut out = [0.0; 12];
        out[0..3].copy_from_slice(self.position.as_slice());
        out[3..6].copy_from_slice(self.velocity.as_slice());
        out[6..9].copy_from_slice(&[a.roll, a.pitch, a.yaw]);
        out[9..12].copy_from_slice(self.body_rates.as_slice());
        out
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self {
            position: Vector3::new(s[0], s[1], s[2]),
            velocity: Vector3::new(s[3], s[4], s[5]),
            attitude: Attitude::new(s[6], s[7], s[8]),
            body_rates: Vector3::new(s[9], s[10], s[11]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RigidBodyDerivative {
    pub position_dot: Vector3<f64>,
    pub velocity_dot: Vector3<f64>,
    pub euler_dot: Vector3<f64>,
    pub body_rates_dot: Vector3<f64>,
}

impl RigidBodyDerivative {
    pub fn to_array(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        out[0..3].copy_from_slice(self.position_dot.as_slice());
        out[3..6].copy_from_slice(self.velocity_dot.as_slice());
        out[6..9].copy_from_slice(self.euler_dot.as_slice());
        out[9..12].copy_from_slice(self.body_rates_dot.as_slice());
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// Airframe mass without arm or payload (kg).
    pub mass: f64,
    /// Principal moments of inertia (kg m^2).
    pub inertia: [f64; 3],
    /// Distance from the center to each rotor hub (m).
    pub arm_length: f64,
    /// Rotor thrust per squared speed (N/(rad/s)^2).
    pub thrust_coefficient: f64,
    /// Rotor drag torque per squared speed (N m/(rad/s)^2).
    pub drag_torque_coefficient: f64,
    pub max_rotor_thrust: f64,
    /// Mass the airframe may carry in addition to its own (kg).
    pub payload_capacity: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            mass: 6.3,
            inertia: [0.3, 0.3, 0.5],
            arm_length: 0.45,
            thrust_coefficient: 1.2e-5,
            drag_torque_coefficient: 2.4e-7,
            max_rotor_thrust: 40.0,
            payload_capacity: 2.7,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), QuadError> {
        let scalars = [
            ("mass", self.mass),
            ("inertia[0]", self.inertia[0]),
            ("inertia[1]", self.inertia[1]),
            ("inertia[2]", self.inertia[2]),
            ("arm_length", self.arm_length),
            ("thrust_coefficient", self.thrust_coefficient),
            ("drag_torque_coefficient", self.drag_torque_coefficient),
            ("max_rotor_thrust", self.max_rotor_thrust),
            ("payload_capacity", self.payload_capacity),
        ];
        for (name, v) in &scalars {
            if !(v.is_finite() && *v > 0.0) {
                return Err(QuadError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Checks that the arm and the payload fit in the carrying capacity.
    pub fn check_budget(&self, arm_mass: f64, payload_mass: f64) -> Result<(), QuadError> {
        let carried = arm_mass + payload_mass;
        if carried > self.payload_capacity + 1e-12 {
            return Err(QuadError::InvalidParams(format!(
                "arm ({arm_mass} kg) plus payload ({payload_mass} kg) exceed the {} kg capacity",
                self.payload_capacity
            )));
        }
        Ok(())
    }

    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::from(self.inertia))
    }

    /// Yaw torque per newton of rotor thrust (m).
    pub fn yaw_ratio(&self) -> f64 {
        self.drag_torque_coefficient / self.thrust_coefficient
    }

    /// Rotor speed producing `thrust` (rad/s).
    pub fn rotor_speed(&self, thrust: f64) -> f64 {
        (thrust.max(0.0) / self.thrust_coefficient).sqrt()
    }

    /// Hub positions in the body frame, in rotor order.
    pub fn rotor_positions(&self) -> [Vector3<f64>; 4] {
        let a = self.arm_length * std::f64::consts::FRAC_1_SQRT_2;
        [
            Vector3::new(a, a, 0.0),
            Vector3::new(a, -a, 0.0),
            Vector3::new(-a, -a, 0.0),
            Vector3::new(-a, a, 0.0),
        ]
    }
}

/// Sense of each rotor's drag torque about body z.
pub const ROTOR_SPIN: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

/// Force and torque in the body frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.torque.iter()).all(|v| v.is_finite())
    }
}

/// Total thrust and body torques from the four rotors.
pub fn rotor_wrench(thrusts: &[f64; 4], p: &VehicleParams) -> (f64, Vector3<f64>) {
    let u = MotorMixer::new(p).allocation() * Vector4::from(*thrusts);
    (u[0], Vector3::new(u[1], u[2], u[3]))
}

/// Maps body rates to Z-Y-X Euler angle rates.
pub fn euler_rates(attitude: &Attitude, body_rates: &Vector3<f64>) -> Result<Vector3<f64>, QuadError> {
    check_pitch(attitude.pitch)?;
    Ok(euler_rates_unchecked(attitude, body_rates))
}

pub(crate) fn euler_rates_unchecked(attitude: &Attitude, w: &Vector3<f64>) -> Vector3<f64> {
    let (sr, cr) = attitude.roll.sin_cos();
    let (sp, cp) = attitude.pitch.sin_cos();
    let t = w[1] * sr + w[2] * cr;
    Vector3::new(w[0] + t * sp / cp, w[1] * cr - w[2] * sr, t / cp)
}

fn check_pitch(pitch: f64) -> Result<(), QuadError> {
    if pitch.abs() >= std::f64::consts::FRAC_PI_2 - SINGULARITY_MARGIN {
        return Err(QuadError::EulerSingularity { pitch });
    }
    Ok(())
}

/// Newton-Euler rigid-body derivative. `external` acts at the center of mass
/// and is expressed in the body frame.
pub fn quad_dynamics(
    state: &RigidBodyState,
    rotor_thrusts: &[f64; 4],
    external: &Wrench,
    p: &VehicleParams,
) -> Result<RigidBodyDerivative, QuadError> {
    check_pitch(state.attitude.pitch)?;
    Ok(quad_dynamics_unchecked(state, rotor_thrusts, external, p))
}

pub(crate) fn quad_dynamics_unchecked(
    state: &RigidBodyState,
    rotor_thrusts: &[f64; 4],
    external: &Wrench,
    p: &VehicleParams,
) -> RigidBodyDerivative {
    let (thrust, torque) = rotor_wrench(rotor_thrusts, p);
    let r = state.attitude.rotation();
    let body_force = Vector3::new(0.0, 0.0, thrust) + external.force;
    let accel = r * body_force / p.mass - Vector3::new(0.0, 0.0, GRAVITY);
    let inertia = p.inertia_matrix();
    let w = state.body_rates;
    let gyro = w.cross(&(inertia * w));
    let wdot = Vector3::new(
        (torque[0] + external.torque[0] - gyro[0]) / p.inertia[0],
        (torque[1] + external.torque[1] - gyro[1]) / p.inertia[1],
        (torque[2] + external.torque[2] - gyro[2]) / p.inertia[2],
    );
    RigidBodyDerivative {
        position_dot: state.velocity,
        velocity_dot: accel,
        euler_dot: euler_rates_unchecked(&state.attitude, &w),
        body_rates_dot: wdot,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixOutput {
    pub thrusts: [f64; 4],
    pub saturated: bool,
}

/// Linear X-configuration thrust allocation and its inverse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotorMixer {
    allocation: Matrix4<f64>,
    mixing: Matrix4<f64>,
    max_thrust: f64,
}

impl MotorMixer {
    pub fn new(p: &VehicleParams) -> Self {
        let pos = p.rotor_positions();
        let k = p.yaw_ratio();
        let mut allocation = Matrix4::zeros();
        for i in 0..4 {
            allocation[(0, i)] = 1.0;
            allocation[(1, i)] = pos[i].y;
            allocation[(2, i)] = -pos[i].x;
            allocation[(3, i)] = ROTOR_SPIN[i] * k;
        }
        let mixing = allocation
            .try_inverse()
            .expect("X-configuration allocation is invertible for positive geometry");
        Self {
            allocation,
            mixing,
            max_thrust: p.max_rotor_thrust,
        }
    }

    /// Rows: total thrust, roll, pitch and yaw moment; columns: rotors.
    pub fn allocation(&self) -> &Matrix4<f64> {
        &self.allocation
    }

    pub fn mixing(&self) -> &Matrix4<f64> {
        &self.mixing
    }

    /// Unsaturated rotor thrusts for the commands.
    pub fn mix_linear(&self, thrust: f64, roll: f64, pitch: f64, yaw: f64) -> [f64; 4] {
        (self.mixing * Vector4::new(thrust, roll, pitch, yaw)).into()
    }

    /// Rotor thrusts within `[0, max]`. When the linear mix does not fit,
    /// the moment commands are scaled down uniformly so the collective is
    /// kept; if the collective alone does not fit it is clamped as well.
    pub fn mix(&self, thrust: f64, roll: f64, pitch: f64, yaw: f64) -> MixOutput {
        let raw = self.mix_linear(thrust, roll, pitch, yaw);
        if raw.iter().all(|t| (0.0..=self.max_thrust).contains(t)) {
            return MixOutput {
                thrusts: raw,
                saturated: false,
            };
        }
        let base = self.mix_linear(thrust, 0.0, 0.0, 0.0);
        let mut scale: f64 = 1.0;
        for (b, r) in base.iter().zip(&raw) {
            let d = r - b;
            if d > 0.0 {
                scale = scale.min((self.max_thrust - b) / d);
            } else if d < 0.0 {
                scale = scale.min(-b / d);
            }
        }
        let scale = if scale.is_nan() { 0.0 } else { scale.clamp(0.0, 1.0) };
        let thrusts = std::array::from_fn(|i| {
            let t = base[i] + scale * (raw[i] - base[i]);
            if t.is_nan() {
                0.0
            } else {
                t.clamp(0.0, self.max_thrust)
            }
        });
        MixOutput {
            thrusts,
            saturated: true,
        }
    }

    /// `(thrust, roll, pitch, yaw)` produced by the rotor thrusts.
    pub fn unmix(&self, thrusts: &[f64; 4]) -> [f64; 4] {
        (self.allocation * Vector4::from(*thrusts)).into()
    }
}

pub fn motor_mixing(thrust_cmd: f64, roll_cmd: f64, pitch_cmd: f64, yaw_cmd: f64, p: &VehicleParams) -> MixOutput {
    MotorMixer::new(p).mix(thrust_cmd, roll_cmd, pitch_cmd, yaw_cmd)
}

/// Where the arm attaches and how its plane is turned about body z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmMount {
    /// Offset of the arm base below the vehicle center of mass (m).
    pub drop: f64,
    /// Base yaw of the arm plane relative to body x (rad).
    pub azimuth: f64,
}

impl ArmMount {
    pub fn origin(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, -self.drop)
    }

    /// Body-frame vector for a planar arm vector `(radial, vertical)`.
    pub fn to_body(&self, planar: &nalgebra::Vector2<f64>) -> Vector3<f64> {
        let (s, c) = self.azimuth.sin_cos();
        Vector3::new(planar.x * c, planar.x * s, planar.y)
    }
}

/// Quasi-static load the arm and payload put on the airframe, in the body
/// frame, with torque about the vehicle center of mass.
///
/// Every link and the payload is a point mass `m` at its center with
/// acceleration `a` relative to the mount; the airframe carries
/// `m * (g - a)` at that point.
pub fn arm_reaction_wrench(
    arm_state: &ArmState,
    arm_accel: &Vector3<f64>,
    arm: &ArmModel,
    mount: &ArmMount,
    base_attitude: &Attitude,
) -> Wrench {
    let g_body = base_attitude.rotation().transpose() * Vector3::new(0.0, 0.0, -arm.gravity);
    let positions = arm.com_positions(&arm_state.q);
    let accels = arm.com_accelerations(arm_state, arm_accel);
    let mut w = Wrench::zero();
    for ((m, p), (_, a)) in positions.iter().zip(&accels) {
        if *m == 0.0 {
            continue;
        }
        let r = mount.origin() + mount.to_body(p);
        let f = *m * (g_body - mount.to_body(a));
        w.force += f;
        w.torque += r.cross(&f);
    }
    w
}

/// Reference body-to-world rotation built independently of [`Attitude::rotation`].
pub fn nalgebra_rotation(attitude: &Attitude) -> Rotation3<f64> {
    Rotation3::from_euler_angles(attitude.roll, attitude.pitch, attitude.yaw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arm_dynamics::LinkParams;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hover_thrusts(p: &VehicleParams) -> [f64; 4] {
        [p.mass * GRAVITY / 4.0; 4]
    }

    #[test]
    fn hover_is_a_fixed_point() {
        let p = VehicleParams::default();
        let s = RigidBodyState::at_rest(Vector3::new(1.0, -2.0, 3.0), 0.7);
        let d = quad_dynamics(&s, &hover_thrusts(&p), &Wrench::zero(), &p).unwrap();
        for v in d.to_array() {
            assert!(v.abs() < 1e-12, "{d:?}");
        }
    }

    #[test]
    fn zero_thrust_is_free_fall() {
        let p = VehicleParams::default();
        let mut s = RigidBodyState::at_rest(Vector3::zeros(), 0.0);
        s.attitude = Attitude::new(0.3, -0.2, 1.0);
        let d = quad_dynamics(&s, &[0.0; 4], &Wrench::zero(), &p).unwrap();
        assert_relative_eq!(d.velocity_dot, Vector3::new(0.0, 0.0, -GRAVITY), epsilon = 1e-14);
    }

    #[test]
    fn singular_pitch_is_rejected() {
        let p = VehicleParams::default();
        let mut s = RigidBodyState::default();
        s.attitude.pitch = std::f64::consts::FRAC_PI_2;
        assert!(matches!(
            quad_dynamics(&s, &[0.0; 4], &Wrench::zero(), &p),
            Err(QuadError::EulerSingularity { .. })
        ));
        s.attitude.pitch = -std::f64::consts::FRAC_PI_2 + 1e-7;
        assert!(quad_dynamics(&s, &[0.0; 4], &Wrench::zero(), &p).is_err());
    }

    #[test]
    fn rotation_agrees_with_nalgebra_euler_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = Attitude::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-1.5..1.5),
                rng.random_range(-3.0..3.0),
            );
            assert_relative_eq!(a.rotation(), *nalgebra_rotation(&a).matrix(), epsilon = 1e-14);
        }
    }

    #[test]
    fn positive_pitch_points_thrust_forward() {
        let a = Attitude::new(0.0, 0.2, 0.0);
        let thrust_dir = a.rotation() * Vector3::z();
        assert!(thrust_dir.x > 0.0);
        let nose = a.rotation() * Vector3::x();
        assert!(nose.z < 0.0);
    }

    #[test]
    fn mixer_hover_and_zero() {
        let p = VehicleParams::default();
        let mg = p.mass * GRAVITY;
        let out = motor_mixing(mg, 0.0, 0.0, 0.0, &p);
        for t in out.thrusts {
            assert_relative_eq!(t, mg / 4.0, epsilon = 1e-12);
        }
        assert!(!out.saturated);
        assert_eq!(motor_mixing(0.0, 0.0, 0.0, 0.0, &p).thrusts, [0.0; 4]);
    }

    #[test]
    fn mixer_roll_moment_is_a_differential_pair() {
        let p = VehicleParams::default();
        let mg = p.mass * GRAVITY;
        let eps = 0.25;
        let mixer = MotorMixer::new(&p);
        let out = mixer.mix(mg, eps, 0.0, 0.0);
        let base = mg / 4.0;
        let d: Vec<f64> = out.thrusts.iter().map(|t| t - base).collect();
        // left rotors (1, 4) up, right rotors (2, 3) down by the same amount
        assert_relative_eq!(d[0], d[3], epsilon = 1e-12);
        assert_relative_eq!(d[1], d[2], epsilon = 1e-12);
        assert_relative_eq!(d[0], -d[1], epsilon = 1e-12);
        assert!(d[0] > 0.0);
        // moment by direct lever-arm arithmetic
        let roll: f64 = p.rotor_positions().iter().zip(&out.thrusts).map(|(r, t)| r.y * t).sum();
        assert_relative_eq!(roll, eps, epsilon = 1e-12);
        let total: f64 = out.thrusts.iter().sum();
        assert_relative_eq!(total, mg, epsilon = 1e-12);
    }

    #[test]
    fn mix_then_unmix_is_identity() {
        let p = VehicleParams::default();
        let mixer = MotorMixer::new(&p);
        assert_relative_eq!(
            mixer.allocation() * mixer.mixing(),
            Matrix4::identity(),
            epsilon = 1e-12
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let cmd = [
                rng.random_range(40.0..100.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-0.2..0.2),
            ];
            let out = mixer.mix(cmd[0], cmd[1], cmd[2], cmd[3]);
            assert!(!out.saturated);
            let back = mixer.unmix(&out.thrusts);
            for k in 0..4 {
                assert!((back[k] - cmd[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mixer_saturation_is_flagged() {
        let p = VehicleParams::default();
        let out = motor_mixing(500.0, 0.0, 0.0, 0.0, &p);
        assert!(out.saturated);
        assert_eq!(out.thrusts, [p.max_rotor_thrust; 4]);
        let out = motor_mixing(0.0, 5.0, 0.0, 0.0, &p);
        assert!(out.saturated);
        assert!(out.thrusts.iter().all(|t| *t >= 0.0));
    }

    #[test]
    fn saturation_keeps_collective_and_moment_direction() {
        let p = VehicleParams::default();
        let mixer = MotorMixer::new(&p);
        let out = mixer.mix(80.0, 0.0, 100.0, 0.0);
        assert!(out.saturated);
        let u = mixer.unmix(&out.thrusts);
        assert_relative_eq!(u[0], 80.0, epsilon = 1e-9);
        assert!(u[2] > 0.0 && u[2] < 100.0);
        assert!(u[1].abs() < 1e-9 && u[3].abs() < 1e-9);
        assert!(out.thrusts.iter().all(|t| (0.0..=p.max_rotor_thrust).contains(t)));
    }

    fn default_arm() -> ArmModel {
        ArmModel::from_total_mass(&crate::kinematics::ArmGeometry::default(), 1.92).unwrap()
    }

    fn mount() -> ArmMount {
        ArmMount {
            drop: 0.1,
            azimuth: 0.0,
        }
    }

    #[test]
    fn resting_arm_weight_with_payload() {
        let arm = default_arm().with_payload(0.512);
        let s = ArmState::at_rest(Vector3::new(-0.4, -0.6, 0.3));
        let w = arm_reaction_wrench(&s, &Vector3::zeros(), &arm, &mount(), &Attitude::default());
        assert_relative_eq!(
            w.force,
            Vector3::new(0.0, 0.0, -(1.92 + 0.512) * GRAVITY),
            epsilon = 1e-9
        );
    }

    #[test]
    fn hanging_arm_has_no_moment() {
        let arm = default_arm().with_payload(0.512);
        let s = ArmState::at_rest(Vector3::new(-std::f64::consts::FRAC_PI_2, 0.0, 0.0));
        let w = arm_reaction_wrench(&s, &Vector3::zeros(), &arm, &mount(), &Attitude::default());
        assert!(w.torque.norm() < 1e-12, "{w:?}");
    }

    #[test]
    fn massless_arm_has_no_wrench() {
        let link = LinkParams { mass: 0.0, length: 0.5 };
        let arm = ArmModel {
            links: [link; 3],
            payload_mass: 0.0,
            gravity: GRAVITY,
        };
        let s = ArmState {
            q: Vector3::new(0.1, 0.2, 0.3),
            qdot: Vector3::new(1.0, -1.0, 2.0),
        };
        let w = arm_reaction_wrench(&s, &Vector3::new(3.0, 1.0, 0.0), &arm, &mount(), &Attitude::default());
        assert_eq!(w, Wrench::zero());
    }

    #[test]
    fn horizontal_arm_moment_is_weight_times_lever() {
        // arm straight out along body +x: moment about body y is +sum(m g x)
        let arm = default_arm();
        let s = ArmState::at_rest(Vector3::zeros());
        let w = arm_reaction_wrench(&s, &Vector3::zeros(), &arm, &mount(), &Attitude::default());
        let mut expect = 0.0;
        let mut base = 0.0;
        for l in &arm.links {
            expect += l.mass * GRAVITY * (base + l.length / 2.0);
            base += l.length;
        }
        assert_relative_eq!(w.torque.y, expect, epsilon = 1e-12);
        assert!(w.torque.x.abs() < 1e-12 && w.torque.z.abs() < 1e-12);
    }

    #[test]
    fn budget_check() {
        let p = VehicleParams::default();
        assert!(p.check_budget(1.92, 0.78).is_ok());
        assert!(p.check_budget(1.92, 0.79).is_err());
        assert!(p.validate().is_ok());
        let bad = VehicleParams { mass: -1.0, ..p };
        assert!(bad.validate().is_err());
    }
}
