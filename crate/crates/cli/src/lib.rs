//! Configuration-driven front end for `vibcool`: reads a run configuration,
//! executes the solve / fcmap / optimize / cool stages and writes plot-ready
//! CSV files plus a JSON summary.

pub mod config;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use run::{Command, RunError, Runner};
