//! Seeded, reproducible experiment runner for `protective-core`.
//!
//! A run is described by a JSON document naming a scenario, a master seed
//! and scenario parameters. Running it writes `results.json` (deterministic
//! given the document), the scenario's CSV/JSON artifacts and `report.json`
//! (provenance and timing).

pub mod config;
pub mod error;
pub mod json;
pub mod runner;
pub mod scenarios;

pub use config::{load, parse, validate, Diagnostic, ExperimentConfig};
pub use error::CliError;
pub use runner::{run, RunOptions, RunReport};
pub use scenarios::{Check, Scenario};
