//! Finite-scale engines for arithmetic Ramsey theory.
//!
//! The crate covers polynomial configurations over integer colorings,
//! finite sums / products / exponential towers of generator sequences,
//! Hales–Jewett and polynomial Hales–Jewett cubes, and exponential
//! tower patterns. Every search is exhaustive inside an explicit window
//! and returns a canonical (least in a documented order) witness, so
//! results do not depend on the number of worker threads.

pub mod bigtower;
pub mod combinatorics;
pub mod config;
pub mod error;
pub mod hjspace;
pub mod bignum;
pub mod polyarith;
pub mod search;

pub use config::SearchConfig;
pub use error::{Error, Result};
