//! archforge: architecture design for dense feedforward classifiers.
//!
//! The crate bundles a deterministic f64 training engine, a discrete
//! architecture search space with random and evolutionary strategies, and a
//! family of constructive learners that grow a network one unit or layer at a
//! time. Everything is seeded: a run with the same seed and inputs reproduces
//! the same numbers.

pub mod cli;
pub mod constructive;
pub mod data;
pub mod error;
pub mod network;
pub mod search;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};
