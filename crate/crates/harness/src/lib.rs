//! Scenario harness for the ntsim simulator: scenario files, runners for
//! the multipath, staggered, failover and flash-crowd experiments, CSV
//! reports and the criterion checks used by the acceptance suite.

pub mod analysis;
pub mod builtin;
pub mod error;
pub mod report;
pub mod runner;
pub mod scenario;

pub use error::{ConfigError, HarnessError};
pub use report::{RunResult, ScenarioResult};
pub use scenario::{load, Resolved, Scenario};
