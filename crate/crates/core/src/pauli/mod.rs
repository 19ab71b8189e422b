//! Pauli strings, a stabilizer tableau and small Clifford circuits.

mod circuit;
mod operator;
mod supercheck;
mod tableau;

pub use circuit::{
    propagate_error, Basis, ChannelEffect, Circuit, NoiseSource, Op, Propagation, Support,
};
pub use operator::{commutes, pauli_multiply, Pauli, PauliOperator, SparsePauli};
pub use supercheck::{verify_all_bonds, verify_supercheck_identity, SupercheckReport};
pub use tableau::{apply_gate, measure_pauli, Gate, MeasurementResult, StabilizerTableau};

use crate::lattice::LatticeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PauliError {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("qubit {0} used twice in one gate")]
    RepeatedQubit(usize),
    #[error("gate {gate} acts on {expected} qubits, got {got}")]
    Arity {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("unsupported gate {0:?} (only Clifford gates are simulated)")]
    UnsupportedGate(String),
    #[error("cannot measure a non-Hermitian Pauli")]
    NotHermitian,
    #[error("fault location {location} out of range for a circuit of {len} operations")]
    InvalidLocation { location: usize, len: usize },
    #[error("bond {bond} out of range ({len} bonds)")]
    BondOutOfRange { bond: usize, len: usize },
    #[error("cannot parse Pauli string: {0}")]
    Parse(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}
