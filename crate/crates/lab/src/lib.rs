//! Scenario generators, experiment orchestration, sweeps and plots on top of
//! `lagflow-core`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod scenario;
pub mod svg;
pub mod sweep;
pub mod validate;

pub use config::{Overrides, RunConfig};
pub use error::{LabError, LabResult};
pub use experiment::{experiment, Experiment, Report};
pub use scenario::{generate, ScenarioKind, ScenarioSpec};
