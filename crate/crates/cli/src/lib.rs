//! Experiment driver for `privcount`: config loading, simulation runs,
//! leakage sweeps and benchmarks, all emitting CSV or JSON.

pub mod bench;
pub mod config;
pub mod discretize;
pub mod epsilon;
pub mod error;
pub mod simulate;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
