//! Floquet simulation of a kicked Ising-chain charger driving a register of
//! battery qubits, with spectral statistics, battery figures of merit and a
//! quantum-Fisher-information entanglement witness.

pub mod error;
pub mod experiments;
pub mod floquet;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod qfi;
pub mod spectral;
pub mod spin_core;

pub use error::{Error, Result};
