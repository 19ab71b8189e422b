//! Threshold estimation for topological cluster states built from
//! entangling operations that fail with a herald.
//!
//! Layers, bottom up: [`pauli`] (Pauli strings and a stabilizer tableau),
//! [`lattice`] (the 3D cluster lattice with losses and errors),
//! [`decoder`] (supercheck matching decoder), [`growth`] (resource
//! growth and per-node error audit) and [`threshold`] (Monte Carlo sweeps
//! and the phase boundary).

pub mod decoder;
pub mod growth;
pub mod lattice;
pub mod pauli;
pub mod stats;
pub mod threshold;
