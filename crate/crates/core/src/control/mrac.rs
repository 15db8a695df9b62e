//! Direct model reference adaptive control for single-input channels.
//!
//! Plant `x' = A x + B (u + Theta*^T Phi(x))`, reference model
//! `x_m' = A_m x_m + B_m r`, control `u = kx^T x + kr r - Theta^T Phi(x)`.
//! With `e = x - x_m` the adaptive laws are
//!
//! ```text
//! kx'    = -gamma_x x (e^T P B)
//! kr'    = -gamma_r r (e^T P B)
//! Theta' =  Gamma Phi (e^T P B)
//! ```
//!
//! which make `V = e^T P e + |dkx|^2/gamma_x + dkr^2/gamma_r + |dTheta|^2/Gamma`
//! non-increasing for a positive input gain.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lyapunov::is_hurwitz;
use super::ControlError;

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceModel {
    a_m: DMatrix<f64>,
    b_m: DVector<f64>,
    pub state: DVector<f64>,
}

impl ReferenceModel {
    pub fn new(a_m: DMatrix<f64>, b_m: DVector<f64>) -> Result<Self, ControlError> {
        if !a_m.is_square() || b_m.len() != a_m.nrows() {
            return Err(ControlError::DimensionMismatch(format!(
                "A_m is {:?}, B_m has {} rows",
                a_m.shape(),
                b_m.len()
            )));
        }
        if !is_hurwitz(&a_m) {
            return Err(ControlError::NotHurwitz {
                abscissa: super::lyapunov::spectral_abscissa(&a_m),
            });
        }
        let n = a_m.nrows();
        Ok(Self {
            a_m,
            b_m,
            state: DVector::zeros(n),
        })
    }

    /// `y'' + 2 zeta wn y' + wn^2 y = wn^2 r` in `(y, y')` coordinates.
    pub fn second_order(wn: f64, zeta: f64) -> Result<Self, ControlError> {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -wn * wn, -2.0 * zeta * wn]);
        let b = DVector::from_vec(vec![0.0, wn * wn]);
        Self::new(a, b)
    }

    /// First-order model `y' = a_m y + b_m r`.
    pub fn first_order(a_m: f64, b_m: f64) -> Result<Self, ControlError> {
        Self::new(DMatrix::from_element(1, 1, a_m), DVector::from_element(1, b_m))
    }

    pub fn a_m(&self) -> &DMatrix<f64> {
        &self.a_m
    }

    pub fn b_m(&self) -> &DVector<f64> {
        &self.b_m
    }

    pub fn derivative(&self, x: &DVector<f64>, r: f64) -> DVector<f64> {
        &self.a_m * x + &self.b_m * r
    }

    /// Advances the model by `dt` with `r` held constant (RK4).
    pub fn step(&mut self, r: f64, dt: f64) -> &DVector<f64> {
        let x = &self.state;
        let k1 = self.derivative(x, r);
        let k2 = self.derivative(&(x + &k1 * (dt / 2.0)), r);
        let k3 = self.derivative(&(x + &k2 * (dt / 2.0)), r);
        let k4 = self.derivative(&(x + &k3 * dt), r);
        self.state = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        &self.state
    }

    pub fn reset(&mut self, state: DVector<f64>) {
        self.state = state;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptationRates {
    pub gamma_x: f64,
    pub gamma_r: f64,
    pub gamma_theta: f64,
}

impl AdaptationRates {
    pub fn uniform(gamma: f64) -> Self {
        Self {
            gamma_x: gamma,
            gamma_r: gamma,
            gamma_theta: gamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MracState {
    pub kx: DVector<f64>,
    pub kr: f64,
    pub theta: DVector<f64>,
    /// Solution of the Lyapunov equation for the reference model.
    pub p: DMatrix<f64>,
    /// Parameter norms above this raise a drift warning.
    pub drift_bound: f64,
}

/// Outcome of one adaptation step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DriftStatus {
    Bounded,
    /// The parameter norm exceeded the configured bound.
    BoundedDrift {
        norm: f64,
    },
}

impl MracState {
    pub fn new(kx: DVector<f64>, kr: f64, theta: DVector<f64>, p: DMatrix<f64>, drift_bound: f64) -> Self {
        Self {
            kx,
            kr,
            theta,
            p,
            drift_bound,
        }
    }

    pub fn parameter_norm(&self) -> f64 {
        (self.kx.norm_squared() + self.kr * self.kr + self.theta.norm_squared()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.kx.iter().chain(self.theta.iter()).all(|v| v.is_finite()) && self.kr.is_finite()
    }
}

/// `u = kx^T x + kr r - Theta^T Phi`.
pub fn mrac_control(x: &DVector<f64>, r: f64, m: &MracState, phi: &DVector<f64>) -> f64 {
    let adaptive = if m.theta.is_empty() { 0.0 } else { m.theta.dot(phi) };
    m.kx.dot(x) + m.kr * r - adaptive
}

/// Scalar `e^T P B` that drives every adaptive law.
pub fn error_projection(e: &DVector<f64>, p: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    (e.transpose() * p * b)[(0, 0)]
}

/// Forward-Euler update of the adaptive laws.
#[allow(clippy::too_many_arguments)]
pub fn mrac_adapt(
    m: &mut MracState,
    x: &DVector<f64>,
    r: f64,
    phi: &DVector<f64>,
    e: &DVector<f64>,
    b: &DVector<f64>,
    rates: &AdaptationRates,
    dt: f64,
) -> DriftStatus {
    let s = error_projection(e, &m.p, b);
    m.kx -= x * (rates.gamma_x * s * dt);
    m.kr -= rates.gamma_r * r * s * dt;
    if !m.theta.is_empty() {
        m.theta += phi * (rates.gamma_theta * s * dt);
    }
    let norm = m.parameter_norm();
    if norm > m.drift_bound || !norm.is_finite() {
        DriftStatus::BoundedDrift { norm }
    } else {
        DriftStatus::Bounded
    }
}

/// Lyapunov candidate around the ideal parameters `(kx*, kr*, Theta*)`.
pub fn lyapunov_candidate(
    e: &DVector<f64>,
    m: &MracState,
    ideal_kx: &DVector<f64>,
    ideal_kr: f64,
    ideal_theta: &DVector<f64>,
    rates: &AdaptationRates,
) -> f64 {
    let dkx = &m.kx - ideal_kx;
    let dkr = m.kr - ideal_kr;
    let mut v = (e.transpose() * &m.p * e)[(0, 0)] + dkx.norm_squared() / rates.gamma_x + dkr * dkr / rates.gamma_r;
    if !m.theta.is_empty() {
        v += (&m.theta - ideal_theta).norm_squared() / rates.gamma_theta;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn state() -> MracState {
        MracState::new(
            DVector::from_vec(vec![-2.0, 0.5]),
            3.0,
            DVector::from_vec(vec![0.1, -0.2, 0.3]),
            DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
            1e3,
        )
    }

    #[test]
    fn zero_gains_give_zero_control() {
        let m = MracState::new(DVector::zeros(2), 0.0, DVector::zeros(3), DMatrix::identity(2, 2), 1.0);
        let x = DVector::from_vec(vec![1.0, -4.0]);
        assert_eq!(mrac_control(&x, 2.0, &m, &DVector::from_vec(vec![1.0, 2.0, 3.0])), 0.0);
    }

    #[test]
    fn control_is_the_affine_combination() {
        let m = state();
        let x = DVector::from_vec(vec![0.4, -1.0]);
        let phi = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let expect = -2.0 * 0.4 + -0.5 + 3.0 * 1.5 - (0.1 - 0.4 - 0.3);
        assert_relative_eq!(mrac_control(&x, 1.5, &m, &phi), expect, epsilon = 1e-15);
    }

    #[test]
    fn zero_error_freezes_adaptation() {
        let mut m = state();
        let before = m.clone();
        let x = DVector::from_vec(vec![0.4, -1.0]);
        let phi = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let b = DVector::from_vec(vec![0.0, 1.0]);
        let status = mrac_adapt(
            &mut m,
            &x,
            1.0,
            &phi,
            &DVector::zeros(2),
            &b,
            &AdaptationRates::uniform(10.0),
            1e-3,
        );
        assert_eq!(status, DriftStatus::Bounded);
        assert_eq!(m, before);
    }

    #[test]
    fn adaptation_follows_the_laws() {
        let mut m = state();
        let x = DVector::from_vec(vec![0.4, -1.0]);
        let phi = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let b = DVector::from_vec(vec![0.0, 1.0]);
        let e = DVector::from_vec(vec![0.2, 0.1]);
        let rates = AdaptationRates {
            gamma_x: 2.0,
            gamma_r: 3.0,
            gamma_theta: 4.0,
        };
        // e^T P B = 0.2 * 0.5 + 0.1 * 1.0
        let s = 0.2;
        let before = m.clone();
        mrac_adapt(&mut m, &x, 1.5, &phi, &e, &b, &rates, 0.01);
        assert_relative_eq!(m.kx, &before.kx - &x * (2.0 * s * 0.01), epsilon = 1e-15);
        assert_relative_eq!(m.kr, before.kr - 3.0 * 1.5 * s * 0.01, epsilon = 1e-15);
        assert_relative_eq!(m.theta, &before.theta + &phi * (4.0 * s * 0.01), epsilon = 1e-15);
    }

    #[test]
    fn drift_is_reported() {
        let mut m = state();
        m.drift_bound = 1.0;
        let x = DVector::from_vec(vec![0.0, 0.0]);
        let status = mrac_adapt(
            &mut m,
            &x,
            0.0,
            &DVector::zeros(3),
            &DVector::zeros(2),
            &DVector::from_vec(vec![0.0, 1.0]),
            &AdaptationRates::uniform(1.0),
            1e-3,
        );
        assert!(matches!(status, DriftStatus::BoundedDrift { .. }));
    }

    #[test]
    fn reference_model_checks_stability() {
        assert!(ReferenceModel::second_order(4.0, 1.0).is_ok());
        assert!(ReferenceModel::second_order(4.0, -0.1).is_err());
        assert!(ReferenceModel::first_order(1.0, 1.0).is_err());
    }

    #[test]
    fn first_order_model_step_matches_closed_form() {
        let mut m = ReferenceModel::first_order(-4.0, 4.0).unwrap();
        let dt = 1e-3;
        for _ in 0..1000 {
            m.step(1.0, dt);
        }
        assert_relative_eq!(m.state[0], 1.0 - (-4.0f64).exp(), epsilon = 1e-10);
    }
}
