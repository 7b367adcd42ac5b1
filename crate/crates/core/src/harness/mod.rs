//! Configuration, verification, and reproduction plumbing behind the CLI.

pub mod commands;
pub mod config;
pub mod reproduce;

pub use commands::{
    measure_distance, render_bound, render_rows, run_bound, run_sweep_rho, run_verify,
    DistanceRequest, VerificationRow, CSV_HEADER,
};
pub use config::{ClaimSpec, CountSpec, ExperimentConfig, ModelSpec, OutputFormat, Target};
pub use reproduce::{render_repro, run_reproduce, ReproRow, ReproSettings, IDS};
