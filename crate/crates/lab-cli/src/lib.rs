//! Batch experiments over the bundled scenario catalog.
//!
//! A run is described by an [`ExperimentConfig`], executed by
//! [`experiments::execute`] and persisted by [`run::run`] as CSV tables with
//! a fixed column order, sorted rows and 17-digit floats.

pub mod config;
pub mod experiments;
pub mod run;
pub mod sampling;
pub mod scenarios;
pub mod table;
pub mod verify;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use experiments::{execute, Outcome, Verdict};
pub use run::{run, RunRecord};
