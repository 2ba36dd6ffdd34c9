//! Experiment harness and helpers behind the `pvote` command.

pub mod harness;

pub use harness::{
    run_experiment, run_experiment_with, to_csv, ExperimentConfig, LengthSpec, ResultRow,
};
