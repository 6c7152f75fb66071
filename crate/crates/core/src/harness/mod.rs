//! Experiment harness: configuration, image I/O, trials, sweeps and the
//! operator self-test.

pub mod config;
pub mod experiment;
pub mod image_io;
pub mod phantoms;
pub mod selftest;

pub use config::{trial_seed, Algorithm, ExperimentConfig};
pub use experiment::{
    builtin_image, mri_config, resolve_image, run_mri_demo, run_paired_trial, run_sweep, run_trial, MriDemo,
    SweepReport, SweepRow, SweepSpec, SweepVariable, TrialOutcome,
};
pub use image_io::{load_image, save_image};
pub use selftest::{run_selftest, SelftestReport};
