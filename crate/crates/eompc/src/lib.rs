//! Scenario harness, file formats and command-line front end for
//! [`eompc_core`].
//!
//! * [`config`]: the TOML suite and vehicle files, `--set` overrides and
//!   validation.
//! * [`harness`]: runs scenarios under DC-feedforward, DC-feedback, EO-EMPC
//!   or LOS-MPC, serially or on a thread pool.
//! * [`output`]: trajectory, diagnostics, plot and summary files.
//! * [`app`]: the subcommands behind the `eompc` binary.

// Negated comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;
pub mod harness;
pub mod output;

use thiserror::Error;

pub use config::{load, ConfigError, LoadedConfig, Method, Override, SuiteConfig};
pub use harness::{run, run_suite, ScenarioResult};

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("output error: {0}")]
    Output(#[from] output::OutputError),
    #[error("{0}")]
    Run(#[from] harness::RunError),
    #[error("{0}")]
    Failed(String),
}

impl Error {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) => 2,
            Error::Output(output::OutputError::Exists { .. }) => 2,
            Error::Run(harness::RunError::Setup { .. }) => 2,
            Error::Output(_) | Error::Run(_) | Error::Failed(_) => 1,
        }
    }
}
