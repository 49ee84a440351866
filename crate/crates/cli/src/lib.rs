//! Scenario runner for `lamvoc`: scenario files, CSV trajectories,
//! text and `key=value` reports, and the `lamvoc` command line.

pub mod cli;
pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

pub use error::{CliError, Result};
pub use scenario::{parse_scenario, parse_scenario_str, Scenario, ScenarioError};
