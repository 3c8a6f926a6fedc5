//! Scenario generation, runs with trace output, and verification suites.

pub mod config;
pub mod run;
pub mod scenario;
pub mod verify;

pub use config::{AlgorithmName, ComparatorRule, RunConfig, ScenarioConfig, TuningMode};
pub use run::{execute, run, RoundRecord, RunOutput, RunSummary};
pub use scenario::{generate, Scenario, ScenarioKind};
pub use verify::{run_suite, CriterionReport, Suite};
