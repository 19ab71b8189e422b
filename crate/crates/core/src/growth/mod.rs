//! Probabilistic growth of node resources, their fusion into the lattice
//! and the resulting per-node error audit.
//!
//! A resource is described by a [`plan`](GrowthPlan): a binary tree of
//! joins over fresh qubits. Every join is one heralded entangling
//! operation; when it fails both halves are thrown away and regrown. The
//! successful history of a plan is also a Clifford circuit, which is what
//! the error audit pushes faults through.

mod fusion;
mod plan;
mod profile;
mod resource;

pub use fusion::{fuse_and_prune_node, node_circuit, FaultRecord, NodeCircuit, NodeOutcome};
pub use plan::{doubling_cost, expected_cost, GrowthPlan, JoinKind, NodeLayout, PlanStep};
pub use profile::{
    estimate_error_profile, required_resource_size, wilson_interval, NodeErrorProfile,
    ProfileTable, ResourceSize,
};
pub use resource::{grow_resource, grow_resource_with_budget, sample_cost, target_graph, ResourceGraph, ResourceStats};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrowthError {
    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("invalid strategy: {0}")]
    Strategy(String),
    #[error("expected cost diverges when every operation fails (p_h = 1)")]
    Divergence,
    #[error("raw-qubit budget of {0} exhausted before the resource completed")]
    BudgetExhausted(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Pauli(#[from] crate::pauli::PauliError),
}

/// Entangling operation used for a join or fusion attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EoKind {
    /// ZZ parity projection followed by an X measurement of one partner,
    /// merging the two qubits into one.
    ParityProjection,
    /// Controlled phase, adding an edge between the two qubits.
    ControlPhase,
}

/// Noise parameters of the entangling operation and the hardware.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EOModel {
    /// Heralded failure probability of one entangling operation.
    pub p_h: f64,
    /// Unheralded error probability per active operation.
    pub p_g: f64,
    /// Error probability per idle qubit per time step.
    pub p_m: f64,
    /// EO used for fusion attempts between neighbouring resources. `None`
    /// picks the one with fewer operations (parity projection).
    pub fusion_eo: Option<EoKind>,
}

impl EOModel {
    pub fn new(p_h: f64, p_g: f64, p_m: f64) -> Result<Self, GrowthError> {
        let m = EOModel {
            p_h,
            p_g,
            p_m,
            fusion_eo: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn noiseless(p_h: f64) -> Self {
        EOModel {
            p_h,
            p_g: 0.0,
            p_m: 0.0,
            fusion_eo: None,
        }
    }

    pub fn p_s(&self) -> f64 {
        1.0 - self.p_h
    }

    pub fn fusion_kind(&self) -> EoKind {
        self.fusion_eo.unwrap_or(EoKind::ParityProjection)
    }

    pub fn validate(&self) -> Result<(), GrowthError> {
        for (name, value) in [("p_h", self.p_h), ("p_G", self.p_g), ("p_M", self.p_m)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GrowthError::Probability { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Every attempt qubit hangs directly off the core.
    Star,
    /// Each direction is a linear chain; attempts run from the tip inward.
    Cross,
    /// Each direction is a tree of given branching and depth.
    Snowflake,
}

impl StrategyKind {
    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::Star => "star",
            StrategyKind::Cross => "cross",
            StrategyKind::Snowflake => "snowflake",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = GrowthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "star" => Ok(StrategyKind::Star),
            "cross" => Ok(StrategyKind::Cross),
            "snowflake" => Ok(StrategyKind::Snowflake),
            _ => Err(GrowthError::Strategy(format!("unknown kind {s:?}"))),
        }
    }
}

/// Resource recipe for one lattice node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GrowthStrategy {
    pub kind: StrategyKind,
    /// Children per tree node (snowflake only).
    pub branching: usize,
    /// Tree depth (snowflake only).
    pub depth: usize,
    /// Fusion attempts per neighbour.
    pub attempts_n: usize,
}

impl GrowthStrategy {
    pub fn star(attempts_n: usize) -> Self {
        GrowthStrategy {
            kind: StrategyKind::Star,
            branching: 1,
            depth: 1,
            attempts_n,
        }
    }

    pub fn cross(attempts_n: usize) -> Self {
        GrowthStrategy {
            kind: StrategyKind::Cross,
            branching: 1,
            depth: 1,
            attempts_n,
        }
    }

    /// Snowflake with the smallest depth that offers `attempts_n` leaves.
    pub fn snowflake(branching: usize, attempts_n: usize) -> Self {
        let mut depth = 1;
        while branching >= 2 && branching.saturating_pow(depth as u32) < attempts_n {
            depth += 1;
        }
        GrowthStrategy {
            kind: StrategyKind::Snowflake,
            branching,
            depth,
            attempts_n,
        }
    }

    pub fn snowflake_with_depth(branching: usize, depth: usize, attempts_n: usize) -> Self {
        GrowthStrategy {
            kind: StrategyKind::Snowflake,
            branching,
            depth,
            attempts_n,
        }
    }

    /// Same shape family with a different number of attempts.
    pub fn with_attempts(&self, attempts_n: usize) -> Self {
        match self.kind {
            StrategyKind::Star => Self::star(attempts_n),
            StrategyKind::Cross => Self::cross(attempts_n),
            StrategyKind::Snowflake => Self::snowflake(self.branching, attempts_n),
        }
    }

    /// Attempt qubits available toward each neighbour.
    pub fn leaves_per_direction(&self) -> usize {
        match self.kind {
            StrategyKind::Star | StrategyKind::Cross => self.attempts_n,
            StrategyKind::Snowflake => self.branching.saturating_pow(self.depth as u32),
        }
    }

    pub fn validate(&self) -> Result<(), GrowthError> {
        if self.attempts_n == 0 {
            return Err(GrowthError::Strategy("attempts_N must be at least 1".into()));
        }
        if self.kind == StrategyKind::Snowflake {
            if self.branching < 2 {
                return Err(GrowthError::Strategy("snowflake branching must be at least 2".into()));
            }
            if self.depth == 0 {
                return Err(GrowthError::Strategy("snowflake depth must be at least 1".into()));
            }
            if self.leaves_per_direction() < self.attempts_n {
                return Err(GrowthError::Strategy(format!(
                    "{}^{} leaves cannot host {} attempts",
                    self.branching, self.depth, self.attempts_n
                )));
            }
            if self.leaves_per_direction() > 1 << 16 {
                return Err(GrowthError::Strategy("snowflake too large".into()));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self.kind {
            StrategyKind::Snowflake => format!("snowflake-b{}", self.branching),
            k => k.label().to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_validation() {
        assert!(EOModel::new(0.5, 0.0, 0.0).is_ok());
        assert!(matches!(
            EOModel::new(1.5, 0.0, 0.0),
            Err(GrowthError::Probability { name: "p_h", .. })
        ));
        assert!(EOModel::new(0.5, -0.1, 0.0).is_err());
        assert!((EOModel::noiseless(0.9).p_s() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn strategy_validation() {
        assert!(GrowthStrategy::star(0).validate().is_err());
        let s = GrowthStrategy::snowflake(2, 44);
        assert_eq!(s.depth, 6);
        assert_eq!(s.leaves_per_direction(), 64);
        assert!(s.validate().is_ok());
        assert!(GrowthStrategy::snowflake_with_depth(2, 2, 5).validate().is_err());
        assert!(GrowthStrategy::snowflake_with_depth(1, 2, 1).validate().is_err());
        assert_eq!(GrowthStrategy::snowflake(3, 10).depth, 3);
        assert_eq!("cross".parse::<StrategyKind>().unwrap(), StrategyKind::Cross);
    }
}
