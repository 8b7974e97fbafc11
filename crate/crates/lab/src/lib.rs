//! Training and certification experiments for OT-regularized prompt
//! adaptation: zero-shot pretraining, prompt adaptation under a selected
//! consistency constraint, and the experiment harness behind the CLI.

pub mod config;
mod error;
pub mod harness;
pub mod train;

pub use error::LabError;
