//! Survey-based binary classification: ingest, labeling, three-stage feature
//! reduction and a four-way classifier comparison.

pub mod classifiers;
pub mod config;
pub mod data_model;
pub mod error;
pub mod evaluation;
pub mod feature_select;
pub mod fixtures;
pub mod ingest;
pub mod labeling;
pub mod pipeline;
pub mod synthgen;

pub use error::{Error, Result};
