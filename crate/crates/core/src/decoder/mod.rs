//! Supercheck formation, defect matching and logical classification.

mod blossom;
mod classify;
mod graph;
mod matching;
mod supercheck;

pub use classify::{
    apply_correction_and_classify, close_over_losses, correction_chain, homology, LogicalOutcome,
};
pub use graph::{build_defect_graph, DefectGraph, DefectSet};
pub use matching::{brute_force_matching, mwpm, Matching, BRUTE_FORCE_MAX};
pub use supercheck::{form_superchecks, SupercheckGraph};

use rand::Rng;

use crate::lattice::{
    extract_syndrome, inject_losses, sample_bonds, sample_errors_on, ClusterLattice, ErrorMask,
    LatticeError, LossMask, Sublattice,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("odd number of defects ({0})")]
    OddDefects(usize),
    #[error("{n} defects exceed the brute-force limit of {max}")]
    TooManyDefects { n: usize, max: usize },
    #[error("defects in clusters {a} and {b} are not connected")]
    Disconnected { a: usize, b: usize },
    #[error("defect refers to unknown cluster {0}")]
    UnknownCluster(usize),
    #[error("defect {0} left unmatched")]
    Unmatched(usize),
    #[error("weight matrix must be symmetric, non-negative and {expected} entries long, got {got}")]
    Shape { expected: usize, got: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// How qubits go missing in a trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossModel {
    /// Each bond missing with this probability; both endpoints lost.
    Bonds(f64),
    /// Each primal qubit lost directly with this probability.
    Qubits(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DecodeFlags {
    /// Also decode the dual sublattice (needs `LossModel::Bonds` to be
    /// meaningful); success then requires both.
    pub both_sublattices: bool,
    /// Per dual qubit, probability of a Z pair on two of its four primal
    /// neighbours. Zero by default.
    pub correlated_pair_rate: f64,
}

/// Decodes one sublattice given its lost set and errors.
pub fn decode_sublattice(
    lat: &ClusterLattice,
    loss: &LossMask,
    errors: &ErrorMask,
    s: Sublattice,
) -> Result<LogicalOutcome, DecodeError> {
    let sg = form_superchecks(lat, loss, s);
    let syn = extract_syndrome(lat, loss, errors, &sg)?;
    let defects = DefectSet::from_syndrome(&syn);
    let g = build_defect_graph(&sg, &defects)?;
    let m = mwpm(&g)?;
    Ok(apply_correction_and_classify(
        lat.complex(s),
        &sg,
        errors.z(s),
        &g,
        &m,
    ))
}

/// One end-to-end trial. Returns true on logical success.
pub fn decode_run<R: Rng + ?Sized>(
    lat: &ClusterLattice,
    loss_model: LossModel,
    p_err: f64,
    rng: &mut R,
    flags: &DecodeFlags,
) -> Result<bool, DecodeError> {
    let loss = match loss_model {
        LossModel::Bonds(p) => sample_bonds(lat, p, rng)?,
        LossModel::Qubits(p) => inject_losses(lat, p, rng)?,
    };
    let mut errors = ErrorMask {
        z_primal: sample_errors_on(&loss.lost_primal, p_err, rng)?,
        z_dual: Vec::new(),
    };
    if flags.correlated_pair_rate > 0.0 {
        crate::lattice::check_prob("correlated_pair_rate", flags.correlated_pair_rate, 1.0)?;
        for e in 0..lat.qubits_per_sublattice() {
            if rng.gen_bool(flags.correlated_pair_rate) {
                let nb = lat.bonds_of(Sublattice::Dual, e);
                let a = rng.gen_range(0..4);
                let b = (a + rng.gen_range(1..4)) % 4;
                for k in [a, b] {
                    let f = lat.bonds()[nb[k]].primal;
                    if !loss.lost_primal[f] {
                        errors.z_primal[f] ^= true;
                    }
                }
            }
        }
    }
    if flags.both_sublattices {
        errors.z_dual = sample_errors_on(&loss.lost_dual, p_err, rng)?;
    }
    if !decode_sublattice(lat, &loss, &errors, Sublattice::Primal)?.success() {
        return Ok(false);
    }
    if flags.both_sublattices {
        return Ok(decode_sublattice(lat, &loss, &errors, Sublattice::Dual)?.success());
    }
    Ok(true)
}
