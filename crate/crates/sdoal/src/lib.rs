//! Scenario runner for the strongly-driven one-atom laser.
//!
//! Reads a flat configuration file, runs one of the registered scenarios
//! on top of [`sdoal_core`] and writes CSV tables plus a JSON summary.
//! Trajectory ensembles run on the rayon pool and give the same numbers as
//! a sequential run with the same master seed.

pub mod analysis;
pub mod config;
pub mod output;
pub mod scenarios;

pub use config::{ConfigError, RunConfig, Scenario};
pub use scenarios::{run_scenario, RunError, ScenarioReport};
