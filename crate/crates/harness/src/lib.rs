//! Numerical checks, proof replays and report output for `qicost`.

pub mod channel;
pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod gen;
pub mod replay;
pub mod report;

pub use channel::channel_identity_gap;
pub use checks::{run_check, run_checks, CheckSpec, REGISTRY};
pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use replay::{
    derive_eq_hqic_floor, derive_eq_ic_floor, main_theorem_demo, ChainStep, ReplayReport,
};
pub use report::{CheckReport, SampleRecord};
