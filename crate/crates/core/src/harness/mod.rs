//! Monte-Carlo experiments: generate or load trajectories, simulate
//! measurements, run the estimators and score them against ground truth.

pub mod config;
pub mod experiment;
pub mod report;
pub mod trajectory;

pub use config::{
    Connectivity, ExperimentConfig, FleetSource, GraphMode, Method, MethodSelection,
};
pub use experiment::{emit_outcome, run_experiment, run_pipeline, ExperimentOutcome, TickOutcome};
pub use report::{emit_report, reduction_percent, ErrorReport};
pub use trajectory::{load_trajectories, write_trajectories};
