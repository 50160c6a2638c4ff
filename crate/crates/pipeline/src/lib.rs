//! Command-line front end for `polariton-core`: config handling, one recipe per
//! task, parallel sweeps, and CSV plus manifest output.

pub mod cli;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod plot;
pub mod sweep;
pub mod tasks;

pub use config::{PartialConfig, RunConfig, SweepFile, Task};
pub use error::{exit, PipelineError, Result};
pub use manifest::Manifest;
pub use sweep::{run, run_batch, sweep};
