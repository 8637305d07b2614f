//! Config parsing and scenario orchestration for the `photon-zb` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, ScenarioConfig, ScenarioKind};
pub use run::{run_scenario, Outcome};
