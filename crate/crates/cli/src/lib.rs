//! Scenario files, the `ccds` command line and parallel Monte Carlo
//! drivers on top of `ccds-core`.
//!
//! Exit codes: 0 success, 1 validation error, 2 I/O error, 3 invariant
//! violation.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod mc;

pub use args::{run, Cli};
pub use commands::{cmd_check, cmd_check_with, cmd_compare, cmd_cva, cmd_resolve, OutputFormat, RunConfig};
pub use config::{load_scenario, Scenario, ScenarioFile};
pub use error::CliError;
