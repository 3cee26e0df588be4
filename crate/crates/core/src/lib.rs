//! Decentralized optimization over directed networks with compressed
//! communication: the robust compressed push-pull iteration, its compressor
//! family, a logistic-regression benchmark and an experiment harness.

pub mod algorithm;
pub mod compression;
mod error;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod problems;

pub use error::{Error, Result};
