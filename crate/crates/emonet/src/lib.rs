//! Host-side companion to `emonet-core`: dataset and stop-word files,
//! binary checkpoints, CSV reports and curves, configuration sweeps, and the
//! `emonet` command-line tool.

pub mod checkpoint;
pub mod curve;
pub mod data;
pub mod error;
pub mod report;
pub mod sweep;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use curve::{export_curve, parse_curve};
pub use data::{encode_dataset, load_dataset, load_stop_words, parse_dataset, parse_stop_words};
pub use error::AppError;
pub use sweep::{sweep_configs, sweep_params, SweepBudget};
