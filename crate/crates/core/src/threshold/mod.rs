//! Monte Carlo sweeps over the lattice, threshold crossings, the
//! correctable (loss, error) region and the phase boundary over growth
//! parameters.

mod crossing;
mod phase;
mod region;
mod sweep;

pub use crossing::{estimate_crossing, Axis, CrossingEstimate, Curve, CurvePoint, PairCrossing};
pub use phase::{memory_effect, phase_boundary, PhaseConfig, PhaseDiagramResult, PhaseRow};
pub use region::{
    correctable_region, isotonic_nonincreasing, CorrectableRegion, RegionColumn, RegionConfig,
};
pub use sweep::{
    induced_loss, run_sweep, with_workers, GrowthParams, SweepConfig, SweepPoint, SweepResult, SweepRow,
};

use crate::decoder::DecodeError;
use crate::growth::GrowthError;
use crate::lattice::LatticeError;

#[derive(Debug, thiserror::Error)]
pub enum ThresholdError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no crossing between {0}")]
    NoCrossing(String),
    #[error("decoding failed at {context}: {source}")]
    Decode {
        context: String,
        #[source]
        source: DecodeError,
    },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
}
