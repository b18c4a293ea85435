//! Simulation harness: scenario configs, seeded Monte Carlo experiments,
//! and figure-ready CSV/JSON reports.

mod experiment;
mod report;
mod scenario;

pub use experiment::{run_experiment, ExperimentKind, ExperimentSpec, Scheme};
pub use report::{
    emit_report, RateReport, RateRow, ReportFormat, ReportMetadata, CSV_COLUMNS,
};
pub use scenario::{
    emit_scenario, load_scenario, sample_users, trial_seed, Scenario,
};
