//! Experiment orchestration for `aloha-core`: parallel replications,
//! configuration files, CSV/JSON artifacts and the `aloha-sim` CLI.

pub mod experiment;
pub mod export;
pub mod formulas;
pub mod parallel;
pub mod spec;

pub use experiment::{run_experiment, ExperimentError, RunOptions, RunReport};
pub use parallel::Runner;
pub use spec::{parse_config, ExperimentKind, ExperimentSpec, SpecError};
