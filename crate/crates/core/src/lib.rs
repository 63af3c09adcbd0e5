//! Numerical toolkit for the security analysis of quantum key distribution:
//! classical and quantum entropies, sampling bounds, two-universal hashing,
//! a protocol simulator with explicit eavesdroppers, and key-rate analyzers
//! for BB84, six-state and B92.

pub mod bounds;
pub mod cli;
pub mod analyzers;
pub mod cinfo;
pub mod engine;
pub mod suites;
pub mod error;
pub mod qcore;
pub mod randkit;

pub use error::{Error, Result};
