//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector, Vector3};
use quadarm::arm_dynamics::ArmModel;
use quadarm::control::{mrac_adapt, mrac_control, solve_lyapunov, AdaptationRates, MracState, ReferenceModel};
use quadarm::sim::{rk4_step, ScenarioConfig};
use quadarm::trajectory::Waypoint;

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn demo_config() -> ScenarioConfig {
    ScenarioConfig::load(scenarios_dir().join("demo.toml")).expect("bundled demo scenario")
}

/// Planar rods hinged at their proximal ends plus a tip point mass, written
/// from scratch: `L = T - V`.
pub fn lagrangian(arm: &ArmModel, q: &[f64; 3], qd: &[f64; 3]) -> f64 {
    let g = arm.gravity;
    let mut t = 0.0;
    let mut v = 0.0;
    let mut jy = 0.0;
    let (mut jvx, mut jvy) = (0.0, 0.0);
    let (mut angle, mut omega) = (0.0, 0.0);
    for i in 0..3 {
        let (m, l) = (arm.links[i].mass, arm.links[i].length);
        angle += q[i];
        omega += qd[i];
        let (s, c) = angle.sin_cos();
        let cy = jy + 0.5 * l * s;
        let cvx = jvx - 0.5 * l * s * omega;
        let cvy = jvy + 0.5 * l * c * omega;
        t += 0.5 * m * (cvx * cvx + cvy * cvy) + 0.5 * (m * l * l / 12.0) * omega * omega;
        v += m * g * cy;
        jy += l * s;
        jvx -= l * s * omega;
        jvy += l * c * omega;
    }
    let mp = arm.payload_mass;
    t += 0.5 * mp * (jvx * jvx + jvy * jvy);
    v += mp * g * jy;
    t - v
}

/// Joint torques from the Euler-Lagrange equations with every derivative of
/// the Lagrangian taken by central differences.
pub fn lagrange_torque(arm: &ArmModel, q: &[f64; 3], qd: &[f64; 3], qdd: &[f64; 3]) -> [f64; 3] {
    // L is quadratic in qd, so central differences in qd are exact for any step
    const HV: f64 = 0.5;
    const HQ: f64 = 1e-4;
    let bump = |x: &[f64; 3], k: usize, h: f64| {
        let mut y = *x;
        y[k] += h;
        y
    };
    // dL/dqd_k at (q, qd)
    let p = |q: &[f64; 3], qd: &[f64; 3], k: usize| {
        (lagrangian(arm, q, &bump(qd, k, HV)) - lagrangian(arm, q, &bump(qd, k, -HV))) / (2.0 * HV)
    };
    std::array::from_fn(|k| {
        let mut ddt = 0.0;
        for j in 0..3 {
            let d_qd = (p(q, &bump(qd, j, HV), k) - p(q, &bump(qd, j, -HV), k)) / (2.0 * HV);
            let d_q = (p(&bump(q, j, HQ), qd, k) - p(&bump(q, j, -HQ), qd, k)) / (2.0 * HQ);
            ddt += d_qd * qdd[j] + d_q * qd[j];
        }
        let dl_dq = (lagrangian(arm, &bump(q, k, HQ), qd) - lagrangian(arm, &bump(q, k, -HQ), qd)) / (2.0 * HQ);
        ddt - dl_dq
    })
}

/// Free-swing energy history: returns `(max |E - E0|, max kinetic energy)`.
pub fn free_swing_energy(arm: &ArmModel, q0: Vector3<f64>, qd0: Vector3<f64>, dt: f64, horizon: f64) -> (f64, f64) {
    use quadarm::arm_dynamics::ArmState;
    let energy = |x: &[f64; 6]| {
        let s = ArmState {
            q: Vector3::new(x[0], x[1], x[2]),
            qdot: Vector3::new(x[3], x[4], x[5]),
        };
        (arm.total_energy(&s), arm.kinetic_energy(&s))
    };
    let f = |_: f64, x: &[f64; 6]| {
        let s = ArmState {
            q: Vector3::new(x[0], x[1], x[2]),
            qdot: Vector3::new(x[3], x[4], x[5]),
        };
        arm.state_derivative(&s, &Vector3::zeros())
            .expect("regular mass matrix")
    };
    let mut x = [q0[0], q0[1], q0[2], qd0[0], qd0[1], qd0[2]];
    let (e0, _) = energy(&x);
    let (mut drift, mut ke_max) = (0.0_f64, 0.0_f64);
    let steps = (horizon / dt).round() as usize;
    for k in 0..steps {
        x = rk4_step(f, k as f64 * dt, &x, dt);
        let (e, ke) = energy(&x);
        drift = drift.max((e - e0).abs());
        ke_max = ke_max.max(ke);
    }
    (drift, ke_max)
}

pub struct ScalarMracRun {
    /// `max |x - x_m|` over the final `tail` seconds.
    pub tail_error: f64,
    /// Largest `|kx|`, `|kr|`, `|theta|` seen during the run.
    pub max_gain: f64,
    pub final_kx: f64,
    pub final_kr: f64,
    pub final_theta: f64,
}

pub const STEP_LEVELS: [f64; 6] = [1.0, -2.0, 0.5, 2.0, -1.0, -0.5];

/// Uncertain first-order plant for the scalar benchmark.
#[derive(Clone, Copy, Debug)]
pub struct ScalarPlant {
    pub a: f64,
    /// Input gain, assumed positive.
    pub b: f64,
    /// Constant matched input disturbance.
    pub theta: f64,
}

/// Plant `x' = a x + b (u + theta)` following a reference model
/// `x_m' = -am x_m + am r` under a step train that cycles through
/// [`STEP_LEVELS`], holding each level for `dwell` seconds.
pub fn scalar_mrac(plant: ScalarPlant, am: f64, gamma: f64, horizon: f64, dwell: f64, tail: f64) -> ScalarMracRun {
    let ScalarPlant { a, b, theta } = plant;
    let dt = 1e-3;
    let mut model = ReferenceModel::first_order(-am, am).expect("stable model");
    let p = solve_lyapunov(&DMatrix::from_element(1, 1, -am), &DMatrix::from_element(1, 1, 1.0)).expect("P");
    let mut m = MracState::new(DVector::zeros(1), 0.0, DVector::zeros(1), p, f64::INFINITY);
    let rates = AdaptationRates::uniform(gamma);
    let bvec = DVector::from_element(1, 1.0);
    let mut x = 0.0;
    let steps = (horizon / dt).round() as usize;
    let tail_start = ((horizon - tail) / dt).round() as usize;
    let mut run = ScalarMracRun {
        tail_error: 0.0,
        max_gain: 0.0,
        final_kx: 0.0,
        final_kr: 0.0,
        final_theta: 0.0,
    };
    for k in 0..steps {
        let t = k as f64 * dt;
        let r = STEP_LEVELS[(t / dwell).floor() as usize % STEP_LEVELS.len()];
        let xv = DVector::from_element(1, x);
        let xm = model.state[0];
        let e = DVector::from_element(1, x - xm);
        if k >= tail_start {
            run.tail_error = run.tail_error.max(e[0].abs());
        }
        let phi = DVector::from_element(1, 1.0);
        let u = mrac_control(&xv, r, &m, &phi);
        mrac_adapt(&mut m, &xv, r, &phi, &e, &bvec, &rates, dt);
        run.max_gain = run.max_gain.max(m.kx[0].abs()).max(m.kr.abs()).max(m.theta[0].abs());
        x = rk4_step(|_, s: &[f64; 1]| [a * s[0] + b * (u + theta)], t, &[x], dt)[0];
        model.step(r, dt);
    }
    run.final_kx = m.kx[0];
    run.final_kr = m.kr;
    run.final_theta = m.theta[0];
    run
}

/// Logistic growth `x' = x (1 - x)`, exact solution at `t`.
pub fn logistic_exact(x0: f64, t: f64) -> f64 {
    1.0 / (1.0 + (1.0 / x0 - 1.0) * (-t).exp())
}

/// Global RK4 error on the logistic equation at `horizon`.
pub fn logistic_rk4_error(x0: f64, horizon: f64, dt: f64) -> f64 {
    let steps = (horizon / dt).round() as usize;
    let mut x = [x0];
    for k in 0..steps {
        x = rk4_step(|_, s: &[f64; 1]| [s[0] * (1.0 - s[0])], k as f64 * dt, &x, dt);
    }
    (x[0] - logistic_exact(x0, horizon)).abs()
}

/// Hover at 2 m, then a 1 m climb issued as a new waypoint at `step_time`.
pub fn altitude_step_config(step_time: f64, settle: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: "altitude_step".into(),
        waypoints: vec![
            Waypoint::new([0.0, 0.0, 2.0], 0.0, step_time),
            Waypoint::new([0.0, 0.0, 3.0], 0.0, settle),
        ],
        payload: quadarm::sim::PayloadConfig {
            enabled: false,
            ..Default::default()
        },
        ..ScenarioConfig::default()
    }
}

pub struct StepResponse {
    /// Last time the altitude was outside the 2% band, measured from the step.
    pub settling_time: f64,
    pub overshoot: f64,
    pub steady_state_error: f64,
}

/// Step metrics from `(t, z)` samples for a step from `z0` to `z1` at `t0`.
pub fn step_response(samples: &[(f64, f64)], t0: f64, z0: f64, z1: f64, band: f64) -> StepResponse {
    let height = z1 - z0;
    let mut last_out = t0;
    let mut peak = f64::NEG_INFINITY;
    for &(t, z) in samples.iter().filter(|(t, _)| *t >= t0) {
        if (z - z1).abs() > band * height.abs() {
            last_out = t;
        }
        peak = peak.max((z - z0) / height);
    }
    let end = samples.last().map_or(0.0, |s| s.0);
    let tail: Vec<f64> = samples.iter().filter(|(t, _)| *t >= end - 1.0).map(|s| s.1).collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    StepResponse {
        settling_time: last_out - t0,
        overshoot: (peak - 1.0).max(0.0),
        steady_state_error: (mean - z1).abs(),
    }
}
