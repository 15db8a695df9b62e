//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] fans
//! work out over the rayon pool; without it every call runs sequentially.
//! Results always come back in input order, so both paths are
//! interchangeable.

use nalgebra::Vector3;

use crate::arm_dynamics::ArmModel;
use crate::kinematics::{forward_kinematics, inverse_kinematics, ArmGeometry, ElbowBranch, IkTarget, KinematicsError};
use crate::sim::{run_scenario, ScenarioConfig, SimError, SimLog};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether `Parallel` actually runs in parallel in this build.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

pub fn run_scenarios(configs: &[ScenarioConfig], exec: Execution) -> Vec<Result<SimLog, SimError>> {
    map(configs, exec, run_scenario)
}

/// Tip position error `|FK(IK(p)) - p|` for each target.
pub fn ik_round_trip_errors(
    targets: &[IkTarget],
    geometry: &ArmGeometry,
    branch: ElbowBranch,
    exec: Execution,
) -> Vec<Result<f64, KinematicsError>> {
    map(targets, exec, |t| {
        let sol = inverse_kinematics(t, geometry, branch)?;
        let p = forward_kinematics(&sol.angles, geometry).translation();
        Ok((p - t.position).norm())
    })
}

/// Asymmetry `max |M - M^T|` and smallest eigenvalue of the mass matrix at
/// each configuration.
pub fn mass_matrix_checks(model: &ArmModel, configs: &[Vector3<f64>], exec: Execution) -> Vec<(f64, f64)> {
    map(configs, exec, |q| {
        let m = model.mass_matrix(q);
        let asym = (m - m.transpose()).abs().max();
        (asym, m.symmetric_eigenvalues().min())
    })
}
