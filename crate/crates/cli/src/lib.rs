//! Command-line pipeline around `qasel-core`: synthesize demo recordings,
//! extract window features, select feature subsets, and run the full
//! evaluation grid. The binary in `main.rs` is a thin argument layer over
//! these functions.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_evaluate, cmd_extract, cmd_select, cmd_synth};
pub use config::PipelineConfig;
pub use error::{CliError, Result};
