//! Graphlet-based explanations for graph classifiers.
//!
//! The pipeline summarizes each graph by its 3/4/5-node graphlet frequencies,
//! trains a small GCN classifier, fits an encoder-decoder surrogate that
//! reproduces the classifier from graphlet frequencies alone, and scores
//! every graphlet for a user-chosen group of graphs with a factual (rank
//! correlation) and a counterfactual (frequency removal) metric.

pub mod artifacts;
pub mod census;
pub mod error;
pub mod explainer;
pub mod graph;
pub mod io;
pub mod layout;
pub mod neural;
pub mod surrogate;

pub use error::{Error, Result};
