//! Quadcopter carrying a three-link manipulator: DH kinematics, Lagrangian
//! arm dynamics, rigid-body flight dynamics, PID and MRAC maneuver control,
//! waypoint trajectories, fixed-step mission simulation and RMS metrics.

pub mod arm_dynamics;
pub mod batch;
pub mod control;
pub mod kinematics;
pub mod metrics_io;
pub mod quadcopter;
pub mod sim;
pub mod trajectory;
