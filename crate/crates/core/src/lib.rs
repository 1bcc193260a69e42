//! Quantum bit commitment simulator and attack laboratory.
//!
//! The crate simulates two-party commitment protocols on exact pure states,
//! audits how much Bob can learn after commit, and builds the generic
//! cheating strategy for Alice from reduced-state fidelities.

pub mod attack;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod protocol;
pub mod protocols;
pub mod quantum;
pub mod spectral;

pub use error::{Error, Result};
