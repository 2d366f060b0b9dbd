//! Feature selection for physiological stress signals via a binary
//! quadratic model minimized by annealing.
//!
//! The pipeline extracts a 39-feature inventory from four channels (hand
//! EDA, foot EDA, ECG, respiration), embeds feature relevance and
//! redundancy in a binary quadratic model (biases from feature-target
//! correlation, couplings from feature-feature correlation), minimizes it
//! with a simulated-annealing sampler backed by an exhaustive oracle for
//! small models, and benchmarks the selection against classical filter
//! baselines (Pearson, mutual information, ANOVA p-value) under shrinking
//! training data.
//!
//! With the default `parallel` feature, annealing restarts, exhaustive
//! enumeration blocks, and experiment-grid cells run on rayon; disabling
//! the feature falls back to sequential execution with bit-identical
//! results.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod io;
pub mod qubo;
pub mod rng;
pub mod sampler;
pub mod signals;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
