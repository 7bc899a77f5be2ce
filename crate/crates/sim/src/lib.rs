//! Experiment tooling around [`adtn_core`]: scenario files, report files,
//! trace files, sweeps and attack replays.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod trace;

pub use commands::{cmd_attack, cmd_oracle, cmd_run, cmd_sweep, execute, run_id, AttackSpec, Axis, Summary};
pub use config::{load, ScenarioConfig};
pub use error::{ConfigError, SimError};
