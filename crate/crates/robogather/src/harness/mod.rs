//! Scenario loading, the execution engine, Monte Carlo statistics, analytic formulas and
//! the built-in scenario catalog.

pub mod analytic;
pub mod catalog;
pub mod engine;
pub mod montecarlo;
pub mod scenario;

use thiserror::Error;

pub use catalog::catalog_scenario;
pub use engine::{run, run_with, Outcome, RunOptions, RunResult, TraceRow};
pub use montecarlo::{monte_carlo, Stats};
pub use scenario::{Goal, RecurrenceMode, RobotSpec, Scenario};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error(transparent)]
    Scheduler(#[from] crate::schedulers::SchedError),
    #[error(transparent)]
    Algorithm(#[from] crate::algorithms::AlgoError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
