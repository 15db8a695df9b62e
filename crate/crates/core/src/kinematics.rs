//! Denavit-Hartenberg kinematics of the arm.
//!
//! The chain is four revolute joints (base yaw `theta1`, then three planar
//! joints `theta2..theta4`) followed by a three-angle wrist `phi1..phi3`.
//! Full kinematics factor as `K = R * E`: the reach matrix `R` places the tip of
//! link 3, the end-effector matrix `E` is a pure rotation.
//!
//! Frame convention: `z` is vertical (up), and `theta1` rotates the arm plane
//! about `z`. Inside the arm plane the radial coordinate is
//! `r = sqrt(x^2 + y^2)` and the vertical coordinate is `z`, both measured from
//! the arm base.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed on the elbow cosine before a target is declared unreachable.
pub const REACH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("target is outside the reachable annulus (elbow cosine {cos_elbow:.9})")]
    Unreachable { cos_elbow: f64 },
    #[error("reach matrix is not invertible")]
    NonInvertible,
    #[error("invalid arm geometry: {0}")]
    InvalidGeometry(String),
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_signed(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_positive(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// 4x4 rigid transform with rotation block `R` and translation column `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneousTransform(Matrix4<f64>);

impl HomogeneousTransform {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn from_parts(rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(translation);
        Self(m)
    }

    /// Wraps a raw matrix without checking it. Use [`is_valid`](Self::is_valid)
    /// when the source is untrusted.
    pub fn from_matrix(matrix: Matrix4<f64>) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.0.fixed_view::<3, 1>(0, 3).into_owned()
    }

    /// Bottom row exactly `(0, 0, 0, 1)`, `R^T R = I` and `det R = 1` within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let m = &self.0;
        if m[(3, 0)] != 0.0 || m[(3, 1)] != 0.0 || m[(3, 2)] != 0.0 || m[(3, 3)] != 1.0 {
            return false;
        }
        let r = self.rotation();
        let orthogonality = (r.transpose() * r - Matrix3::identity()).abs().max();
        orthogonality <= tol && (r.determinant() - 1.0).abs() <= tol
    }

    /// Closed-form rigid inverse `[R^T, -R^T p]`.
    pub fn rigid_inverse(&self) -> Self {
        let rt = self.rotation().transpose();
        Self::from_parts(&rt, &(-(rt * self.translation())))
    }
}

impl Mul for HomogeneousTransform {
    type Output = HomogeneousTransform;

    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Mul for &HomogeneousTransform {
    type Output = HomogeneousTransform;

    fn mul(self, rhs: Self) -> HomogeneousTransform {
        HomogeneousTransform(self.0 * rhs.0)
    }
}

/// `D_x(alpha, a)`: rotation by `alpha` about `x` and displacement `a` along `x`.
pub fn dx_transform(alpha: f64, a: f64) -> HomogeneousTransform {
    let (s, c) = alpha.sin_cos();
    HomogeneousTransform(Matrix4::new(
        1.0, 0.0, 0.0, a, //
        0.0, c, -s, 0.0, //
        0.0, s, c, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    ))
}

/// `D_z(gamma, c)`: rotation by `gamma` about `z` and displacement `c` along `z`.
pub fn dz_transform(gamma: f64, c: f64) -> HomogeneousTransform {
    let (s, co) = gamma.sin_cos();
    HomogeneousTransform(Matrix4::new(
        co, -s, 0.0, 0.0, //
        s, co, 0.0, 0.0, //
        0.0, 0.0, 1.0, c, //
        0.0, 0.0, 0.0, 1.0,
    ))
}

/// One row of the DH table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DhRow {
    pub theta: f64,
    pub d: f64,
    pub alpha: f64,
    pub a: f64,
}

impl DhRow {
    /// Angles are wrapped into `(-pi, pi]`.
    pub fn new(theta: f64, d: f64, alpha: f64, a: f64) -> Self {
        Self {
            theta: wrap_signed(theta),
            d,
            alpha: wrap_signed(alpha),
            a,
        }
    }

    pub fn transform(&self) -> HomogeneousTransform {
        dz_transform(self.theta, self.d) * dx_transform(self.alpha, self.a)
    }
}

/// Link lengths of the three planar links and the mount offset below the drone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmGeometry {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// Distance from the drone body to the first joint (m).
    pub d1: f64,
}

impl Default for ArmGeometry {
    fn default() -> Self {
        Self {
            l1: 0.44,
            l2: 0.78,
            l3: 0.10,
            d1: 0.10,
        }
    }
}

impl ArmGeometry {
    pub fn new(l1: f64, l2: f64, l3: f64, d1: f64) -> Result<Self, KinematicsError> {
        let g = Self { l1, l2, l3, d1 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let lengths = [self.l1, self.l2, self.l3];
        if lengths.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(KinematicsError::InvalidGeometry(format!(
                "link lengths must be positive, got {lengths:?}"
            )));
        }
        if !self.d1.is_finite() || self.d1 < 0.0 {
            return Err(KinematicsError::InvalidGeometry(format!(
                "mount offset d1 must be non-negative, got {}",
                self.d1
            )));
        }
        Ok(())
    }

    /// Radius of the reach sphere.
    pub fn reach(&self) -> f64 {
        self.l1 + self.l2 + self.l3
    }

    pub fn lengths(&self) -> [f64; 3] {
        [self.l1, self.l2, self.l3]
    }
}

/// Arm joint angles `theta1..theta4` and wrist angles `phi1..phi3` (rad).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArmJointAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl ArmJointAngles {
    pub fn new(theta: [f64; 4], phi: [f64; 3]) -> Self {
        Self {
            theta1: theta[0],
            theta2: theta[1],
            theta3: theta[2],
            theta4: theta[3],
            phi1: phi[0],
            phi2: phi[1],
            phi3: phi[2],
        }
    }

    /// Azimuth of link 3 in the arm plane, `theta2 + theta3 + theta4`.
    pub fn azimuth(&self) -> f64 {
        self.theta2 + self.theta3 + self.theta4
    }

    /// The three planar joints driven by the arm dynamics.
    pub fn planar(&self) -> [f64; 3] {
        [self.theta2, self.theta3, self.theta4]
    }

    pub fn theta(&self) -> [f64; 4] {
        [self.theta1, self.theta2, self.theta3, self.theta4]
    }

    /// All angles mapped into `[0, 2pi)` for reporting.
    pub fn normalized(&self) -> Self {
        Self {
            theta1: wrap_positive(self.theta1),
            theta2: wrap_positive(self.theta2),
            theta3: wrap_positive(self.theta3),
            theta4: wrap_positive(self.theta4),
            phi1: wrap_positive(self.phi1),
            phi2: wrap_positive(self.phi2),
            phi3: wrap_positive(self.phi3),
        }
    }
}

/// The seven rows of the arm's DH table for the given joint values.
pub fn dh_table(q: &ArmJointAngles, g: &ArmGeometry) -> [DhRow; 7] {
    [
        DhRow::new(q.theta1, 0.0, FRAC_PI_2, 0.0),
        DhRow::new(q.theta2, 0.0, 0.0, g.l1),
        DhRow::new(q.theta3, 0.0, 0.0, g.l2),
        DhRow::new(q.theta4, 0.0, FRAC_PI_2, g.l3),
        DhRow::new(q.phi1, 0.0, FRAC_PI_2, 0.0),
        DhRow::new(q.phi2, 0.0, -FRAC_PI_2, 0.0),
        DhRow::new(q.phi3, 0.0, 0.0, 0.0),
    ]
}

/// Reach matrix: product of the first four DH transforms.
pub fn reach_matrix(q: &ArmJointAngles, g: &ArmGeometry) -> HomogeneousTransform {
    let t = dz_transform(q.theta1, 0.0)
        * dx_transform(FRAC_PI_2, 0.0)
        * dz_transform(q.theta2, 0.0)
        * dx_transform(0.0, g.l1)
        * dz_transform(q.theta3, 0.0)
        * dx_transform(0.0, g.l2)
        * dz_transform(q.theta4, 0.0)
        * dx_transform(FRAC_PI_2, g.l3);
    debug_assert!(t.is_valid(1e-9));
    t
}

/// Closed-form tip position `(L cos theta1, L sin theta1, S)`.
pub fn reach_position(q: &ArmJointAngles, g: &ArmGeometry) -> Vector3<f64> {
    let (radial, vertical) = planar_tip(&q.planar(), &g.lengths());
    let (s1, c1) = q.theta1.sin_cos();
    Vector3::new(radial * c1, radial * s1, vertical)
}

/// Tip of link 3 in the arm plane for planar joints `q` and link lengths `l`.
pub(crate) fn planar_tip(q: &[f64; 3], l: &[f64; 3]) -> (f64, f64) {
    let mut angle = 0.0;
    let (mut x, mut z) = (0.0, 0.0);
    for (qi, li) in q.iter().zip(l) {
        angle += qi;
        x += li * angle.cos();
        z += li * angle.sin();
    }
    (x, z)
}

/// End-effector (wrist) matrix; a pure rotation.
pub fn end_effector_matrix(phi1: f64, phi2: f64, phi3: f64) -> HomogeneousTransform {
    let t = dz_transform(phi1, 0.0)
        * dx_transform(FRAC_PI_2, 0.0)
        * dz_transform(phi2, 0.0)
        * dx_transform(-FRAC_PI_2, 0.0)
        * dz_transform(phi3, 0.0)
        * dx_transform(0.0, 0.0);
    debug_assert!(t.is_valid(1e-9));
    t
}

/// `K = R * E`.
pub fn forward_kinematics(q: &ArmJointAngles, g: &ArmGeometry) -> HomogeneousTransform {
    reach_matrix(q, g) * end_effector_matrix(q.phi1, q.phi2, q.phi3)
}

/// Which root of the elbow arccos to take.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElbowBranch {
    /// Positive elbow angle: the elbow sits below the base-to-wrist line.
    #[default]
    Down,
    /// Negative elbow angle.
    Up,
}

impl ElbowBranch {
    fn sign(self) -> f64 {
        match self {
            ElbowBranch::Down => 1.0,
            ElbowBranch::Up => -1.0,
        }
    }
}

/// Desired tip position (arm base frame) and link-3 azimuth `psi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IkTarget {
    pub position: Vector3<f64>,
    pub azimuth: f64,
}

impl IkTarget {
    pub fn new(x: f64, y: f64, z: f64, azimuth: f64) -> Self {
        Self {
            position: Vector3::new(x, y, z),
            azimuth,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IkSolution {
    pub angles: ArmJointAngles,
    /// Target lies on the base axis (`x = y = 0`); `theta1` was defaulted to 0.
    pub base_singular: bool,
}

/// Closed-form position + azimuth inverse kinematics.
///
/// Wrist angles are left at zero; orient the gripper with [`end_effector_ik`].
pub fn inverse_kinematics(
    target: &IkTarget,
    g: &ArmGeometry,
    branch: ElbowBranch,
) -> Result<IkSolution, KinematicsError> {
    let p = target.position;
    let psi = target.azimuth;
    let base_singular = p.x == 0.0 && p.y == 0.0;
    let theta1 = if base_singular { 0.0 } else { p.y.atan2(p.x) };
    let radial = p.x.hypot(p.y);

    // wrist (joint 4) in the arm plane
    let wx = radial - g.l3 * psi.cos();
    let wz = p.z - g.l3 * psi.sin();

    let mut cos_elbow = (wx * wx + wz * wz - g.l1 * g.l1 - g.l2 * g.l2) / (2.0 * g.l1 * g.l2);
    if cos_elbow.abs() > 1.0 + REACH_TOLERANCE || !cos_elbow.is_finite() {
        return Err(KinematicsError::Unreachable { cos_elbow });
    }
    cos_elbow = cos_elbow.clamp(-1.0, 1.0);

    let theta3 = branch.sign() * cos_elbow.acos();
    let eta = wz.atan2(wx);
    let theta2 = eta - (g.l2 * theta3.sin()).atan2(g.l1 + g.l2 * theta3.cos());
    let theta4 = psi - (theta2 + theta3);

    Ok(IkSolution {
        angles: ArmJointAngles::new([theta1, theta2, theta3, theta4], [0.0; 3]),
        base_singular,
    })
}

/// Solves `E = R^-1 T` for the wrist given the reach and task matrices.
pub fn end_effector_ik(
    reach: &HomogeneousTransform,
    task: &HomogeneousTransform,
) -> Result<HomogeneousTransform, KinematicsError> {
    let inv = reach.matrix().try_inverse().ok_or(KinematicsError::NonInvertible)?;
    if !inv.iter().all(|v| v.is_finite()) {
        return Err(KinematicsError::NonInvertible);
    }
    Ok(HomogeneousTransform::from_matrix(inv * task.matrix()))
}
