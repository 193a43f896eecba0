//! Truncated Fock-space toolkit for two-mode squeezed superposition states:
//! construction, photon statistics, phase-space distributions, entanglement
//! and metrology measures, trapped-ion generation dynamics, and a
//! displacement-sensing probe protocol.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod ion;
pub mod linalg;
pub mod metrology;
pub mod output;
pub mod probe;
pub mod states;
pub mod stats;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockSpace, Operator, StateVector};
