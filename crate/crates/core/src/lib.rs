//! Simulator and analyzer for the two-observer magic-square demonstration of
//! Bell's theorem.
//!
//! * [`quantum`]: four-qubit state vectors, Pauli observables, projective measurement.
//! * [`square`]: the 3×3 observable grid, its product identities and eigenbases.
//! * [`experiment`]: the source/detector engine, rounds, batches, rule checks.
//! * [`classical`]: hidden-variable colorings and classical game values.
//! * [`wire`]: the JSON record schema shared by the CLI and the service.

pub mod classical;
pub mod error;
pub mod experiment;
pub mod quantum;
pub mod square;
pub mod wire;

pub use error::{Error, Result};

/// Absolute tolerance for every algebraic identity checked in this crate.
pub const TOLERANCE: f64 = 1e-12;
