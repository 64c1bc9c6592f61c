//! Experiment harness: configuration, the per-grid-point runner and the
//! claims battery behind `giantwalk verify`.

pub mod claims;
pub mod config;
pub mod experiment;
pub mod ledger;

pub use claims::{verify_suite, Plan};
pub use config::{ConfigError, ExperimentConfig, Scale};
pub use experiment::{run_experiment, ExperimentError};
pub use ledger::{ClaimRecord, ClaimsLedger, Verdict};
