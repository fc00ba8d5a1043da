//! Scenario runner for the isoflow solver: configuration, the Lax,
//! cavitation, nucleation and custom set-ups, reference solutions and
//! output files.

pub mod config;
pub mod error;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use config::{RunConfig, Scenario};
pub use error::{CliError, CliResult};
pub use run::{run, RunSummary};
pub use sweep::{sweep, SweepSpec};
