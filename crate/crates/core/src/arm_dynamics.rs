//! Lagrangian dynamics of the planar three-link arm.
//!
//! Each link is a thin rod of mass `m` and length `l` hinged at its proximal
//! end. Planar joint angles `q = (q1, q2, q3)` are relative; link `i` points
//! along the cumulative angle `q1 + .. + qi` measured from the horizontal. The
//! motion plane is `(x, y)` with `y` vertical (up), matching the angular
//! velocity `q_dot * k_hat`. These three joints are DH joints 2-4; the base
//! yaw is treated kinematically.
//!
//! The equations of motion are `M(q) q_ddot + C(q, q_dot) q_dot + G(q) = tau`
//! with `C` assembled from Christoffel symbols of the analytic `dM/dq`.
//!
//! A grasped payload is a point mass at the tip of link 3.

use nalgebra::{Matrix2x3, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::ArmGeometry;

pub const GRAVITY: f64 = 9.81;

/// Time constant of the exponential torque ramp (s).
pub const TORQUE_TIME_CONSTANT: f64 = 5.0;

/// Mass matrices with a worse condition number than this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("mass matrix is singular or ill-conditioned (condition number {condition:e})")]
    SingularMass { condition: f64 },
    #[error("invalid arm parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkParams {
    pub mass: f64,
    pub length: f64,
}

impl LinkParams {
    pub fn new(mass: f64, length: f64) -> Result<Self, DynamicsError> {
        let p = Self { mass, length };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.mass.is_finite() && self.mass > 0.0 && self.length.is_finite() && self.length > 0.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "link mass and length must be positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArmState {
    pub q: Vector3<f64>,
    pub qdot: Vector3<f64>,
}

impl ArmState {
    pub fn at_rest(q: Vector3<f64>) -> Self {
        Self {
            q,
            qdot: Vector3::zeros(),
        }
    }
}

/// Thin-rod inertia about the link's own axes: `m * diag(0, l^2/12, l^2/12)`.
pub fn link_inertia(p: &LinkParams) -> Matrix3<f64> {
    let i = p.mass * p.length * p.length / 12.0;
    Matrix3::from_diagonal(&Vector3::new(0.0, i, i))
}

/// Rotation from a link frame to the base frame: planar rotation about `z`.
pub fn link_rotation(cumulative_angle: f64) -> Matrix3<f64> {
    let (s, c) = cumulative_angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Angular Jacobian of link `i` (1-based): ones in row 3, columns `1..=i`.
pub fn angular_jacobian(i: usize) -> Matrix3<f64> {
    assert!((1..=3).contains(&i), "link index {i} out of range 1..=3");
    let mut j = Matrix3::zeros();
    for col in 0..i {
        j[(2, col)] = 1.0;
    }
    j
}

/// Lever coefficients of a point on the chain: full link lengths up to the
/// carrying link, then the offset along that link.
fn lever(links: &[LinkParams; 3], carrying: usize, offset: f64) -> [f64; 3] {
    let mut coef = [0.0; 3];
    for (j, c) in coef.iter_mut().enumerate().take(carrying) {
        *c = links[j].length;
    }
    coef[carrying] = offset;
    coef
}

fn cumulative(q: &Vector3<f64>) -> [(f64, f64); 3] {
    let mut angle = 0.0;
    let mut out = [(0.0, 0.0); 3];
    for (k, slot) in out.iter_mut().enumerate() {
        angle += q[k];
        *slot = angle.sin_cos();
    }
    out
}

/// Planar Jacobian of a point with lever coefficients `coef`.
fn planar_jacobian(coef: &[f64; 3], sc: &[(f64, f64); 3]) -> Matrix2x3<f64> {
    let mut jac = Matrix2x3::zeros();
    for a in 0..3 {
        for j in a..3 {
            let (s, c) = sc[j];
            jac[(0, a)] -= coef[j] * s;
            jac[(1, a)] += coef[j] * c;
        }
    }
    jac
}

/// `d/dq_c` of [`planar_jacobian`].
fn planar_jacobian_partial(coef: &[f64; 3], sc: &[(f64, f64); 3], c_idx: usize) -> Matrix2x3<f64> {
    let mut djac = Matrix2x3::zeros();
    for a in 0..3 {
        for j in a.max(c_idx)..3 {
            let (s, c) = sc[j];
            djac[(0, a)] -= coef[j] * c;
            djac[(1, a)] -= coef[j] * s;
        }
    }
    djac
}

fn planar_position(coef: &[f64; 3], sc: &[(f64, f64); 3]) -> Vector2<f64> {
    coef.iter()
        .zip(sc)
        .fold(Vector2::zeros(), |acc, (k, (s, c))| acc + Vector2::new(k * c, k * s))
}

/// Velocity Jacobian of the center of mass of link `i` (1-based), so that
/// `v_ci = J * q_dot`. The third row is zero.
pub fn velocity_jacobian(q: &Vector3<f64>, i: usize, links: &[LinkParams; 3]) -> Matrix3<f64> {
    assert!((1..=3).contains(&i), "link index {i} out of range 1..=3");
    let coef = lever(links, i - 1, links[i - 1].length / 2.0);
    let jac = planar_jacobian(&coef, &cumulative(q));
    let mut out = Matrix3::zeros();
    out.fixed_view_mut::<2, 3>(0, 0).copy_from(&jac);
    out
}

struct PointMass {
    mass: f64,
    coef: [f64; 3],
}

/// Three-link arm with an optional tip payload.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmModel {
    pub links: [LinkParams; 3],
    pub payload_mass: f64,
    pub gravity: f64,
}

impl ArmModel {
    pub fn new(links: [LinkParams; 3]) -> Result<Self, DynamicsError> {
        for l in &links {
            l.validate()?;
        }
        Ok(Self {
            links,
            payload_mass: 0.0,
            gravity: GRAVITY,
        })
    }

    /// Splits `total_mass` across the links in proportion to their lengths.
    pub fn from_total_mass(geometry: &ArmGeometry, total_mass: f64) -> Result<Self, DynamicsError> {
        let total_length = geometry.reach();
        let lengths = geometry.lengths();
        let links = lengths.map(|l| LinkParams {
            mass: total_mass * l / total_length,
            length: l,
        });
        Self::new(links)
    }

    pub fn with_payload(mut self, payload_mass: f64) -> Self {
        self.payload_mass = payload_mass;
        self
    }

    pub fn with_gravity(mut self, gravity: f64) -> Self {
        self.gravity = gravity;
        self
    }

    pub fn link_mass(&self) -> f64 {
        self.links.iter().map(|l| l.mass).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.link_mass() + self.payload_mass
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.links.map(|l| l.length)
    }

    fn point_masses(&self) -> impl Iterator<Item = PointMass> + '_ {
        let links = (0..3).map(|i| PointMass {
            mass: self.links[i].mass,
            coef: lever(&self.links, i, self.links[i].length / 2.0),
        });
        let payload = (self.payload_mass > 0.0).then(|| PointMass {
            mass: self.payload_mass,
            coef: lever(&self.links, 2, self.links[2].length),
        });
        links.chain(payload)
    }

    /// Centers of mass of the links and the payload (if any), planar `(x, y)`.
    pub fn com_positions(&self, q: &Vector3<f64>) -> Vec<(f64, Vector2<f64>)> {
        let sc = cumulative(q);
        self.point_masses()
            .map(|p| (p.mass, planar_position(&p.coef, &sc)))
            .collect()
    }

    /// Planar accelerations of the same points as [`com_positions`](Self::com_positions).
    pub fn com_accelerations(&self, state: &ArmState, qddot: &Vector3<f64>) -> Vec<(f64, Vector2<f64>)> {
        let sc = cumulative(&state.q);
        let mut rates = [0.0; 3];
        let mut acc = 0.0;
        for (k, r) in rates.iter_mut().enumerate() {
            acc += state.qdot[k];
            *r = acc;
        }
        self.point_masses()
            .map(|p| {
                let jac = planar_jacobian(&p.coef, &sc);
                // centripetal part: -sum coef_j * w_j^2 * (c_j, s_j)
                let centripetal = p
                    .coef
                    .iter()
                    .zip(&sc)
                    .zip(&rates)
                    .fold(Vector2::zeros(), |a, ((k, (s, c)), w)| {
                        a - Vector2::new(k * w * w * c, k * w * w * s)
                    });
                (p.mass, jac * qddot + centripetal)
            })
            .collect()
    }

    pub fn mass_matrix(&self, q: &Vector3<f64>) -> Matrix3<f64> {
        let sc = cumulative(q);
        let mut m = Matrix3::zeros();
        for p in self.point_masses() {
            let jac = planar_jacobian(&p.coef, &sc);
            m += p.mass * jac.transpose() * jac;
        }
        // rod spin inertia; R_i and J_w only see the z axis
        for (i, link) in self.links.iter().enumerate() {
            let jw = angular_jacobian(i + 1);
            let r = link_rotation(q.iter().take(i + 1).sum());
            m += jw.transpose() * r.transpose() * link_inertia(link) * r * jw;
        }
        m
    }

    /// `[dM/dq1, dM/dq2, dM/dq3]`.
    pub fn mass_matrix_partials(&self, q: &Vector3<f64>) -> [Matrix3<f64>; 3] {
        let sc = cumulative(q);
        let mut out = [Matrix3::zeros(); 3];
        for p in self.point_masses() {
            let jac = planar_jacobian(&p.coef, &sc);
            for (c, d) in out.iter_mut().enumerate() {
                let djac = planar_jacobian_partial(&p.coef, &sc, c);
                let term = djac.transpose() * jac;
                *d += p.mass * (term + term.transpose());
            }
        }
        out
    }

    /// Coriolis/centrifugal matrix from Christoffel symbols of the first kind.
    pub fn coriolis_matrix(&self, state: &ArmState) -> Matrix3<f64> {
        let dm = self.mass_matrix_partials(&state.q);
        let qd = &state.qdot;
        Matrix3::from_fn(|k, j| {
            (0..3)
                .map(|i| 0.5 * (dm[i][(k, j)] + dm[j][(k, i)] - dm[k][(i, j)]) * qd[i])
                .sum()
        })
    }

    /// `G(q) = dV/dq`.
    pub fn gravity_vector(&self, q: &Vector3<f64>) -> Vector3<f64> {
        let sc = cumulative(q);
        let mut g = Vector3::zeros();
        for p in self.point_masses() {
            for k in 0..3 {
                let dy: f64 = (k..3).map(|j| p.coef[j] * sc[j].1).sum();
                g[k] += p.mass * self.gravity * dy;
            }
        }
        g
    }

    /// Kinetic energy, summed link by link from the velocity and angular Jacobians.
    pub fn kinetic_energy(&self, state: &ArmState) -> f64 {
        let mut t = 0.0;
        for (i, link) in self.links.iter().enumerate() {
            let v = velocity_jacobian(&state.q, i + 1, &self.links) * state.qdot;
            let w = angular_jacobian(i + 1) * state.qdot;
            let angle: f64 = state.q.iter().take(i + 1).sum();
            let r = link_rotation(angle);
            let spin = (r * w).dot(&(link_inertia(link) * (r * w)));
            t += 0.5 * (link.mass * v.norm_squared() + spin);
        }
        if self.payload_mass > 0.0 {
            let coef = lever(&self.links, 2, self.links[2].length);
            let v = planar_jacobian(&coef, &cumulative(&state.q)) * state.qdot;
            t += 0.5 * self.payload_mass * v.norm_squared();
        }
        t
    }

    /// Gravitational potential with the datum at the base joint height.
    pub fn potential_energy(&self, q: &Vector3<f64>) -> f64 {
        self.com_positions(q).iter().map(|(m, p)| m * self.gravity * p.y).sum()
    }

    pub fn total_energy(&self, state: &ArmState) -> f64 {
        self.kinetic_energy(state) + self.potential_energy(&state.q)
    }

    /// Solves `M q_ddot = tau - C q_dot - G` for the joint accelerations.
    pub fn equations_of_motion(&self, state: &ArmState, tau: &Vector3<f64>) -> Result<Vector3<f64>, DynamicsError> {
        let m = self.mass_matrix(&state.q);
        let eig = m.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if condition.is_nan() || condition > MAX_CONDITION {
            return Err(DynamicsError::SingularMass { condition });
        }
        let rhs = tau - self.coriolis_matrix(state) * state.qdot - self.gravity_vector(&state.q);
        m.cholesky()
            .map(|ch| ch.solve(&rhs))
            .ok_or(DynamicsError::SingularMass { condition })
    }

    /// `(q_dot, q_ddot)` packed as a 6-vector for integrators.
    pub fn state_derivative(&self, state: &ArmState, tau: &Vector3<f64>) -> Result<[f64; 6], DynamicsError> {
        let qdd = self.equations_of_motion(state, tau)?;
        Ok([state.qdot[0], state.qdot[1], state.qdot[2], qdd[0], qdd[1], qdd[2]])
    }
}

/// Open-loop joint torque schedule: an exponential ramp toward `tau_final`
/// followed by the same samples in reverse.
#[derive(Clone, Debug, PartialEq)]
pub struct TorqueProfile {
    pub tau_final: Vector3<f64>,
    pub rise_duration: f64,
    pub dt: f64,
    series: Vec<Vector3<f64>>,
}

impl TorqueProfile {
    pub fn series(&self) -> &[Vector3<f64>] {
        &self.series
    }

    /// Length of the whole schedule (ramp plus reversal).
    pub fn duration(&self) -> f64 {
        self.series.len() as f64 * self.dt
    }

    /// Zero-order-hold lookup; zero before the start and after the end.
    pub fn sample(&self, t: f64) -> Vector3<f64> {
        if t < 0.0 {
            return Vector3::zeros();
        }
        let k = (t / self.dt + 1e-9).floor() as usize;
        self.series.get(k).copied().unwrap_or_else(Vector3::zeros)
    }
}

/// `tau(t) = tau_final * (1 - exp(-t / 5))` sampled every `dt` up to
/// `rise_duration`, then concatenated with its reverse.
pub fn torque_profile(tau_final: Vector3<f64>, rise_duration: f64, dt: f64) -> Result<TorqueProfile, DynamicsError> {
    if !(dt > 0.0 && rise_duration >= 0.0 && rise_duration.is_finite()) {
        return Err(DynamicsError::InvalidParams(format!(
            "torque profile needs dt > 0 and a finite rise duration, got dt={dt}, rise={rise_duration}"
        )));
    }
    let n = (rise_duration / dt).round() as usize;
    let forward: Vec<Vector3<f64>> = (0..=n)
        .map(|k| tau_final * (1.0 - (-(k as f64 * dt) / TORQUE_TIME_CONSTANT).exp()))
        .collect();
    let mut series = forward.clone();
    series.extend(forward.into_iter().rev());
    Ok(TorqueProfile {
        tau_final,
        rise_duration,
        dt,
        series,
    })
}
