use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ThresholdError;
use crate::decoder::{decode_run, DecodeFlags, LossModel};
use crate::growth::{EoKind, GrowthStrategy, ProfileTable};
use crate::lattice::{build_lattice, ClusterLattice};
use crate::stats::{derive_seed, wilson_interval};

/// Trials handed to one task. Part of the scheduling only; results do
/// not depend on it.
const CHUNK: u64 = 32;

/// Growth parameters a lattice point was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub p_h: f64,
    pub p_g: f64,
    pub p_m: f64,
}

/// One grid point of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub loss: LossModel,
    pub p_err: f64,
    pub growth: Option<GrowthParams>,
}

impl SweepPoint {
    pub fn qubit_loss(p_loss: f64, p_err: f64) -> Self {
        SweepPoint {
            loss: LossModel::Qubits(p_loss),
            p_err,
            growth: None,
        }
    }

    pub fn bond_loss(p_bond: f64, p_err: f64) -> Self {
        SweepPoint {
            loss: LossModel::Bonds(p_bond),
            p_err,
            growth: None,
        }
    }

    /// Lattice point induced by growing every node with `s`: bonds go
    /// missing at `p_h^N` and each qubit carries the core's Z error rate.
    pub fn from_growth(
        s: &GrowthStrategy,
        fusion: EoKind,
        g: GrowthParams,
        traces: usize,
        seed: u64,
    ) -> Result<Self, ThresholdError> {
        let table = ProfileTable::build(s, fusion, g.p_h, traces, seed)?;
        let prof = table.evaluate(g.p_g, g.p_m);
        Ok(SweepPoint {
            loss: LossModel::Bonds(prof.bond_missing_prob),
            p_err: prof.p_z,
            growth: Some(g),
        })
    }

    /// Marginal probability that a primal qubit is lost.
    pub fn p_loss(&self) -> f64 {
        match self.loss {
            LossModel::Qubits(p) => p,
            LossModel::Bonds(p) => induced_loss(p),
        }
    }

    pub fn p_bond(&self) -> Option<f64> {
        match self.loss {
            LossModel::Bonds(p) => Some(p),
            LossModel::Qubits(_) => None,
        }
    }

    fn validate(&self) -> Result<(), ThresholdError> {
        let (name, p) = match self.loss {
            LossModel::Bonds(p) => ("p_bond", p),
            LossModel::Qubits(p) => ("p_loss", p),
        };
        check_prob(name, p)?;
        check_prob("p_err", self.p_err)?;
        if let Some(g) = self.growth {
            check_prob("p_h", g.p_h)?;
            check_prob("p_G", g.p_g)?;
            check_prob("p_M", g.p_m)?;
        }
        Ok(())
    }
}

/// Qubit loss caused by independent bond failures on its four bonds.
pub fn induced_loss(p_bond: f64) -> f64 {
    1.0 - (1.0 - p_bond).powi(4)
}

pub(crate) fn check_prob(name: &str, p: f64) -> Result<(), ThresholdError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ThresholdError::Config(format!("{name} = {p} outside [0, 1]")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub points: Vec<SweepPoint>,
    pub trials: u64,
    pub seed: u64,
    /// Threads to use; `None` uses the global pool.
    pub workers: Option<usize>,
    pub flags: DecodeFlags,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ThresholdError> {
        if self.trials == 0 {
            return Err(ThresholdError::Config("trials must be at least 1".into()));
        }
        if self.sizes.is_empty() || self.points.is_empty() {
            return Err(ThresholdError::Config("sizes and points must be nonempty".into()));
        }
        if let Some(&l) = self.sizes.iter().find(|&&l| l < 2) {
            return Err(ThresholdError::Config(format!("lattice size {l} below 2")));
        }
        if self.workers == Some(0) {
            return Err(ThresholdError::Config("workers must be at least 1".into()));
        }
        self.points.iter().try_for_each(SweepPoint::validate)
    }
}

/// Counts at one (point, size) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p_h: Option<f64>,
    pub p_g: Option<f64>,
    pub p_m: Option<f64>,
    pub p_bond: Option<f64>,
    pub p_loss: f64,
    pub p_err: f64,
    pub size: usize,
    pub trials: u64,
    pub failures: u64,
    pub fail_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl SweepRow {
    pub(crate) fn new(point: &SweepPoint, size: usize, trials: u64, failures: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials);
        SweepRow {
            p_h: point.growth.map(|g| g.p_h),
            p_g: point.growth.map(|g| g.p_g),
            p_m: point.growth.map(|g| g.p_m),
            p_bond: point.p_bond(),
            p_loss: point.p_loss(),
            p_err: point.p_err,
            size,
            trials,
            failures,
            fail_rate: failures as f64 / trials as f64,
            ci_low,
            ci_high,
            seed,
        }
    }
}

/// Rows in grid order: points outer, sizes inner.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, ThresholdError> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ThresholdError::Config(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub(crate) fn build_lattices(sizes: &[usize]) -> Result<Vec<ClusterLattice>, ThresholdError> {
    sizes
        .iter()
        .map(|&l| build_lattice(l).map_err(ThresholdError::from))
        .collect()
}

/// Failure counts per point and lattice, in the current pool. `ids`
/// give each point its seed coordinate.
pub(crate) fn count_failures(
    lattices: &[ClusterLattice],
    points: &[(u64, SweepPoint)],
    trials: u64,
    seed: u64,
    flags: &DecodeFlags,
) -> Result<Vec<Vec<u64>>, ThresholdError> {
    let chunks = trials.div_ceil(CHUNK);
    let tasks: Vec<(usize, usize, u64)> = (0..points.len())
        .flat_map(|p| (0..lattices.len()).flat_map(move |s| (0..chunks).map(move |c| (p, s, c))))
        .collect();
    let counts: Result<Vec<u64>, ThresholdError> = tasks
        .par_iter()
        .map(|&(p, s, c)| {
            let (id, point) = &points[p];
            let lat = &lattices[s];
            let mut fails = 0;
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[*id, s as u64, t]));
                let ok = decode_run(lat, point.loss, point.p_err, &mut rng, flags).map_err(|e| {
                    ThresholdError::Decode {
                        context: format!("L={} {:?} p_err={}", lat.size(), point.loss, point.p_err),
                        source: e,
                    }
                })?;
                fails += u64::from(!ok);
            }
            Ok(fails)
        })
        .collect();
    let counts = counts?;
    let mut out = vec![vec![0u64; lattices.len()]; points.len()];
    for (&(p, s, _), n) in tasks.iter().zip(counts) {
        out[p][s] += n;
    }
    Ok(out)
}

/// Runs every (point, size) pair for `cfg.trials` trials. Trial `t` of
/// size index `s` at point `p` uses a seed derived from
/// `(seed, p, s, t)`, so counts do not depend on the number of workers.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, ThresholdError> {
    cfg.validate()?;
    let lattices = build_lattices(&cfg.sizes)?;
    let points: Vec<(u64, SweepPoint)> =
        cfg.points.iter().enumerate().map(|(i, p)| (i as u64, *p)).collect();
    let counts = with_workers(cfg.workers, || {
        count_failures(&lattices, &points, cfg.trials, cfg.seed, &cfg.flags)
    })??;
    let mut rows = Vec::with_capacity(points.len() * cfg.sizes.len());
    for (point, per_size) in cfg.points.iter().zip(&counts) {
        for (&l, &f) in cfg.sizes.iter().zip(per_size) {
            rows.push(SweepRow::new(point, l, cfg.trials, f, cfg.seed));
        }
    }
    Ok(SweepResult { rows })
}
