use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::region::CorrectableRegion;
use super::sweep::{check_prob, induced_loss, with_workers};
use super::ThresholdError;
use crate::growth::{required_resource_size, EoKind, GrowthStrategy, ProfileTable, StrategyKind};
use crate::stats::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub kind: StrategyKind,
    /// Tree branchings tried for snowflakes; ignored otherwise.
    pub branchings: Vec<usize>,
    pub p_h_grid: Vec<f64>,
    /// Bond failure targets. Each fixes the attempts per neighbour at
    /// every `p_h`.
    pub targets: Vec<f64>,
    pub fusion: EoKind,
    /// Fusion histories sampled per error profile.
    pub traces: usize,
    pub seed: u64,
    /// Search range for the gate error rate.
    pub p_g_range: (f64, f64),
    pub bisection_steps: usize,
    /// Memory error rate as a multiple of the gate error rate.
    pub memory_ratio: f64,
    pub workers: Option<usize>,
}

impl PhaseConfig {
    pub fn new(kind: StrategyKind, p_h_grid: Vec<f64>) -> Self {
        PhaseConfig {
            kind,
            branchings: vec![2, 3, 4],
            p_h_grid,
            targets: vec![0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 5e-4, 2e-4, 1e-4],
            fusion: EoKind::ParityProjection,
            traces: 8,
            seed: 0,
            p_g_range: (1e-7, 0.1),
            bisection_steps: 40,
            memory_ratio: 0.0,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<(), ThresholdError> {
        if self.p_h_grid.is_empty() || self.targets.is_empty() {
            return Err(ThresholdError::Config("p_h grid and targets must be nonempty".into()));
        }
        for &p in &self.p_h_grid {
            check_prob("p_h", p)?;
            if p >= 1.0 {
                return Err(ThresholdError::Config("p_h must be below 1".into()));
            }
        }
        if self.targets.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(ThresholdError::Config("targets must lie in (0, 1)".into()));
        }
        if self.kind == StrategyKind::Snowflake
            && (self.branchings.is_empty() || self.branchings.iter().any(|&b| b < 2))
        {
            return Err(ThresholdError::Config("snowflake branchings must be at least 2".into()));
        }
        let (lo, hi) = self.p_g_range;
        if !(lo > 0.0 && lo < hi && hi <= 1.0) {
            return Err(ThresholdError::Config(format!("bad p_G range ({lo}, {hi})")));
        }
        if !(self.memory_ratio >= 0.0 && self.memory_ratio.is_finite()) {
            return Err(ThresholdError::Config("memory ratio must be nonnegative".into()));
        }
        if self.traces == 0 || self.workers == Some(0) {
            return Err(ThresholdError::Config("traces and workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    /// Strategy family.
    pub strategy: String,
    pub p_h: f64,
    /// Zero when nothing in the search range is feasible.
    pub p_g_max: f64,
    pub attempts_n: usize,
    pub resource_qubits: usize,
    pub shape: Option<GrowthStrategy>,
    pub target_bond_fail: f64,
    /// Lattice point of the chosen shape at `p_g_max`.
    pub p_loss: f64,
    pub p_err: f64,
    pub diagnostics: Option<String>,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramResult {
    pub rows: Vec<PhaseRow>,
}

impl PhaseDiagramResult {
    pub fn at(&self, p_h: f64) -> Option<&PhaseRow> {
        self.rows.iter().find(|r| r.p_h == p_h)
    }
}

/// One candidate resource at one `p_h`.
struct Candidate {
    shape: GrowthStrategy,
    target: f64,
    qubits: usize,
    p_loss: f64,
    allowed: f64,
    table: ProfileTable,
}

impl Candidate {
    fn p_err(&self, p_g: f64, ratio: f64) -> f64 {
        self.table.evaluate(p_g, ratio * p_g).p_z
    }

    fn feasible(&self, p_g: f64, ratio: f64) -> bool {
        self.p_err(p_g, ratio) < self.allowed
    }

    /// Largest feasible gate error rate in `(lo, hi]` by bisection on a
    /// log scale, or `None`.
    fn p_g_max(&self, lo: f64, hi: f64, ratio: f64, steps: usize) -> Option<f64> {
        if !self.feasible(lo, ratio) {
            return None;
        }
        if self.feasible(hi, ratio) {
            return Some(hi);
        }
        let (mut a, mut b) = (lo.ln(), hi.ln());
        for _ in 0..steps {
            let m = 0.5 * (a + b);
            if self.feasible(m.exp(), ratio) {
                a = m;
            } else {
                b = m;
            }
        }
        Some(a.exp())
    }
}

fn shapes(cfg: &PhaseConfig, p_h: f64) -> Result<Vec<(GrowthStrategy, f64, usize)>, ThresholdError> {
    let branchings: &[usize] = match cfg.kind {
        StrategyKind::Snowflake => &cfg.branchings,
        _ => &[2],
    };
    let mut out: Vec<(GrowthStrategy, f64, usize)> = Vec::new();
    for &t in &cfg.targets {
        for &b in branchings {
            let r = required_resource_size(cfg.kind, b, p_h, t)?;
            if !out.iter().any(|(s, _, _)| *s == r.strategy) {
                out.push((r.strategy, t, r.total_qubits));
            }
        }
    }
    Ok(out)
}

/// For every `p_h`, the largest gate error rate for which some resource
/// of the family puts the lattice inside `region`. Candidates span the
/// bond failure targets and, for snowflakes, the branchings; each is
/// searched separately and the best is reported.
pub fn phase_boundary(
    cfg: &PhaseConfig,
    region: &CorrectableRegion,
) -> Result<PhaseDiagramResult, ThresholdError> {
    cfg.validate()?;
    let (lo, mut hi) = cfg.p_g_range;
    if cfg.memory_ratio > 0.0 {
        hi = hi.min(1.0 / cfg.memory_ratio);
    }
    let mut rows = Vec::new();
    for &p_h in &cfg.p_h_grid {
        let candidates: Result<Vec<Candidate>, ThresholdError> = with_workers(cfg.workers, || {
            shapes(cfg, p_h)?
                .into_par_iter()
                .map(|(shape, target, qubits)| {
                    let p_loss = induced_loss(p_h.powi(shape.attempts_n as i32));
                    let seed = derive_seed(
                        cfg.seed,
                        &[p_h.to_bits(), shape.branching as u64, shape.depth as u64, shape.attempts_n as u64],
                    );
                    let table = ProfileTable::build(&shape, cfg.fusion, p_h, cfg.traces, seed)?;
                    Ok(Candidate {
                        shape,
                        target,
                        qubits,
                        p_loss,
                        allowed: region.max_error(p_loss),
                        table,
                    })
                })
                .collect()
        })?;
        let candidates = candidates?;
        let mut best: Option<(f64, &Candidate)> = None;
        for c in &candidates {
            if let Some(p) = c.p_g_max(lo, hi, cfg.memory_ratio, cfg.bisection_steps) {
                let better = match best {
                    None => true,
                    Some((q, b)) => p > q || (p == q && c.qubits < b.qubits),
                };
                if better {
                    best = Some((p, c));
                }
            }
        }
        let label = cfg.kind.label().to_string();
        rows.push(match best {
            Some((p, c)) => PhaseRow {
                strategy: label,
                p_h,
                p_g_max: p,
                attempts_n: c.shape.attempts_n,
                resource_qubits: c.qubits,
                shape: Some(c.shape),
                target_bond_fail: c.target,
                p_loss: c.p_loss,
                p_err: c.p_err(p, cfg.memory_ratio),
                diagnostics: None,
                seed: cfg.seed,
            },
            None => {
                // closest miss, for the report
                let near = candidates.iter().min_by(|a, b| {
                    let ga = a.p_err(lo, cfg.memory_ratio) - a.allowed;
                    let gb = b.p_err(lo, cfg.memory_ratio) - b.allowed;
                    ga.total_cmp(&gb)
                });
                let diagnostics = near.map(|c| {
                    format!(
                        "infeasible down to p_G = {lo:e}: closest is {} with N = {}, loss {:.4}, error {:.3e} against {:.3e} allowed",
                        c.shape.label(),
                        c.shape.attempts_n,
                        c.p_loss,
                        c.p_err(lo, cfg.memory_ratio),
                        c.allowed
                    )
                });
                PhaseRow {
                    strategy: label,
                    p_h,
                    p_g_max: 0.0,
                    attempts_n: 0,
                    resource_qubits: 0,
                    shape: None,
                    target_bond_fail: 0.0,
                    p_loss: 0.0,
                    p_err: 0.0,
                    diagnostics,
                    seed: cfg.seed,
                }
            }
        });
    }
    Ok(PhaseDiagramResult { rows })
}

/// [`phase_boundary`] with memory errors at `ratio` times the gate
/// error rate.
pub fn memory_effect(
    cfg: &PhaseConfig,
    region: &CorrectableRegion,
    ratio: f64,
) -> Result<PhaseDiagramResult, ThresholdError> {
    let mut c = cfg.clone();
    c.memory_ratio = ratio;
    phase_boundary(&c, region)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region() -> CorrectableRegion {
        CorrectableRegion::from_boundary(
            &[(0.0, 0.03), (0.05, 0.026), (0.1, 0.02), (0.15, 0.014), (0.2, 0.007)],
            Some(0.25),
            0.05,
            0.002,
        )
    }

    fn quick(kind: StrategyKind, p_h: Vec<f64>) -> PhaseConfig {
        let mut c = PhaseConfig::new(kind, p_h);
        c.targets = vec![0.05, 0.01, 0.002];
        c.branchings = vec![2];
        c.traces = 2;
        c
    }

    #[test]
    fn without_failures_the_limit_is_the_error_boundary_over_node_weight() {
        let r = region();
        let cfg = quick(StrategyKind::Star, vec![0.0]);
        let out = phase_boundary(&cfg, &r).unwrap();
        let row = &out.rows[0];
        assert_eq!(row.attempts_n, 1);
        assert_eq!(row.p_loss, 0.0);
        let allowed = r.max_error(0.0);
        assert!((row.p_err - allowed).abs() < 1e-6 * allowed, "{row:?}");
        // first-order weight of the node
        let t = ProfileTable::build(&GrowthStrategy::star(1), EoKind::ParityProjection, 0.0, 1, 0).unwrap();
        let weight = t.evaluate(1e-9, 0.0).p_z / 1e-9;
        let ratio = row.p_g_max * weight / allowed;
        assert!(ratio > 1.0 && ratio < 1.2, "{ratio}");
    }

    #[test]
    fn feasibility_is_downward_closed() {
        let r = region();
        let cfg = quick(StrategyKind::Snowflake, vec![0.5]);
        let out = phase_boundary(&cfg, &r).unwrap();
        let row = &out.rows[0];
        let shape = row.shape.unwrap();
        let seed = derive_seed(
            cfg.seed,
            &[0.5f64.to_bits(), shape.branching as u64, shape.depth as u64, shape.attempts_n as u64],
        );
        let t = ProfileTable::build(&shape, cfg.fusion, 0.5, cfg.traces, seed).unwrap();
        for f in [1.0, 0.5, 0.1, 0.01] {
            assert!(t.evaluate(row.p_g_max * f, 0.0).p_z < r.max_error(row.p_loss));
        }
        assert!(t.evaluate(row.p_g_max * 1.01, 0.0).p_z >= r.max_error(row.p_loss));
    }

    #[test]
    fn memory_errors_lower_the_boundary() {
        let r = region();
        let cfg = quick(StrategyKind::Snowflake, vec![0.5]);
        let base = phase_boundary(&cfg, &r).unwrap();
        assert_eq!(memory_effect(&cfg, &r, 0.0).unwrap(), base);
        let mut last = base.rows[0].p_g_max;
        for ratio in [0.1, 0.5] {
            let p = memory_effect(&cfg, &r, ratio).unwrap().rows[0].p_g_max;
            assert!(p <= last, "{p} > {last}");
            last = p;
        }
    }

    #[test]
    fn hopeless_regions_report_zero() {
        let r = CorrectableRegion::from_boundary(&[(0.0, 0.001), (0.1, 0.0)], None, 0.1, 0.002);
        let out = phase_boundary(&quick(StrategyKind::Cross, vec![0.5]), &r).unwrap();
        assert_eq!(out.rows[0].p_g_max, 0.0);
        assert!(out.rows[0].diagnostics.is_some());
    }
}
