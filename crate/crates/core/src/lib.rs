//! Simulation and estimation toolkit for non-Hermitian two-level sensors.

pub mod diff;
pub mod dilation;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod linalg;
pub mod noise;
pub mod rng;

pub use error::{Error, Result};
