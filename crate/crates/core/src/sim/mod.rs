//! Scenario configuration, integration and logging.

pub mod config;
pub mod rk4;
pub mod runner;

pub use config::{ArmConfig, ArmTarget, ConfigError, PayloadConfig, ScenarioConfig};
pub use rk4::{integrate, rk4_step};
pub use runner::{run_scenario, Plant, SimError, SimEvent, SimEventKind, SimLog, SimRecord, STATE_LEN};
