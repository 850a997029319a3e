//! Estimation and inference for degree-heterogeneous random-graph models.

pub mod beta_models;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod fisher_crb;
pub mod graph_data;
pub mod hypothesis;
pub mod math;

pub use error::{Error, Result};
