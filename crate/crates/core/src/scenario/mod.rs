//! Scenario files, generators and the scenario runner behind the CLI.

pub mod batch;
pub mod format;
pub mod generate;
pub mod run;

pub use format::{load_scenario, save_scenario, Problem, Scenario, ScenarioFile, ScenarioKind};
pub use generate::{generate_cube_scenario, generate_localization_scenario, LocalizationParams};
pub use run::{analyze, run, Analysis, RunOptions, RunOutcome, RunReport};
