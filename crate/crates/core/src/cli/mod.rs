//! Scenario runner behind the `semiconcave` binary: configuration layering,
//! the stage pipeline and artifact emission.

pub mod emit;
pub mod runner;
pub mod scenario;

pub use emit::{emit_grid, read_grid, tabulate, GridRow};
pub use runner::{run_scenario, Assertion, Metrics, RunReport, StageReport, StageStatus};
pub use scenario::{resolve, ConfigFile, GridFormat, Knobs, Overrides, ScenarioConfig, Stage};
