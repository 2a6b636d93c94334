//! Steering analysis for small multiqubit states.
//!
//! The crate models a three-setting uncertainty-relation steering test on
//! registers of up to four qubits: exact steering parameters and their
//! monogamy classification, a genuine-tripartite-entanglement witness, a
//! waveplate-level preparation model for W-class states, and a finite-shot
//! measurement simulator with bootstrap error bars and state tomography.

#![warn(missing_debug_implementations)]

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod random;
pub mod statespec;
pub mod states;
pub mod steering;
pub mod entanglement;

pub use error::{Error, Result};
pub use linalg::{Axis, DensityMatrix, Ket, Observable, Party};
