//! Dynamical subset sampling of logical failure rates for adaptive
//! fault-tolerant protocols.
//!
//! A protocol is a set of stabilizer circuits joined by transitions that
//! read measurement outcomes. Sampling builds a tree of visited circuits
//! and fault-weight subsets; evaluating that tree at any physical rate
//! gives a lower bound on the logical failure rate, a cutoff error and
//! their statistical spread.

pub mod analysis;
pub mod circuit;
pub mod config;
pub mod error;
pub mod exhaustive;
pub mod library;
pub mod noise;
pub mod pauli;
pub mod protocol;
pub mod sampler;
pub mod stats;
pub mod tableau;
pub mod tree;
pub mod variance;

pub use error::{Error, Result};
