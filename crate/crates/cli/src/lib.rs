//! Command-line orchestration of the yles experiments: typed configuration,
//! artifact writing with manifests, and SVG figures.

pub mod config;
pub mod plot;
pub mod run;

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use run::{run, RunError, RunSummary};
