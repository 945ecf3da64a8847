//! Pipeline orchestration for the robohead expression stack: configuration,
//! dataset manifests, synthetic data, and the command implementations behind
//! the `robohead` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod synth;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
