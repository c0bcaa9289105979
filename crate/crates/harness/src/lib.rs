//! Experiment harness: configuration, execution, and persistent results for
//! the clustering-augmentation optimization studies.

pub mod acceptance;
pub mod config;
pub mod experiments;
pub mod report;
pub mod rows;

pub use augclust_core as core;
