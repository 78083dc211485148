//! Dissipative preparation of matrix product states on small spin chains:
//! exact AKLT tensors, engineered jump operators, quantum-trajectory
//! simulation, steady-state uniqueness certificates, chain-merging
//! protocol analysis, and a Rydberg-dressing physical layer.

pub mod aklt_mps;
pub mod cli;
pub mod connection;
pub mod error;
pub mod liouvillian;
pub mod linalg;
pub mod many_body;
pub mod report;
pub mod rydberg_eit;
pub mod spin_algebra;
pub mod symmetry_general;
pub mod trajectory;
pub mod uniqueness;

pub use error::{Error, Result};
