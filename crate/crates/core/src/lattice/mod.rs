//! The periodic 3D cluster lattice, its loss and error masks and syndromes.

mod dump;
mod geometry;
mod masks;

pub use dump::{read_trial, write_trial, TrialDump};
pub use geometry::{build_lattice, Bond, CellComplex, ClusterLattice, Sublattice};
pub use masks::{
    extract_syndrome, inject_losses, sample_bonds, sample_errors, sample_errors_on, ErrorMask,
    LossMask, Syndrome,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("lattice size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("bond {bond} out of range ({len} bonds)")]
    BondOutOfRange { bond: usize, len: usize },
    #[error("probability {name} = {value} outside [{lo}, {hi}]")]
    Probability {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("integrity: {0}")]
    Integrity(String),
    #[error("trial dump line {line}: {msg}")]
    Dump { line: usize, msg: String },
}

pub(crate) fn check_prob(name: &'static str, value: f64, hi: f64) -> Result<(), LatticeError> {
    if (0.0..=hi).contains(&value) {
        Ok(())
    } else {
        Err(LatticeError::Probability {
            name,
            value,
            lo: 0.0,
            hi,
        })
    }
}
