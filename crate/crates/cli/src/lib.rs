//! Command-line front end: `metadesign design` and `metadesign solve`.

pub mod config;
pub mod run;

pub use config::{parse_config, Cli, Mode, RunConfig, UsageError};
pub use run::{run_design, run_solve, RunError};
