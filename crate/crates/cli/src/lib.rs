//! Instance files and seeded batch experiments for `brdlab-core`.

pub mod experiment;
pub mod instance;

pub use experiment::{
    run_experiment, run_with_threads, ExperimentConfig, ExperimentReport, StartPolicy,
};
pub use instance::{load_instance, parse_instance, save_instance, InstanceError};
