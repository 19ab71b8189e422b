use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fusion::{node_circuit, sample_attempts, FaultRecord};
use super::plan::GrowthPlan;
use super::{EOModel, EoKind, GrowthError, GrowthStrategy, StrategyKind};
use crate::pauli::{ChannelEffect, NoiseSource};
use crate::stats::derive_seed;

pub use crate::stats::wilson_interval;

/// Error rates one node leaves on the lattice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeErrorProfile {
    /// X error on the node's own core.
    pub p_x: f64,
    /// Z error on the node's own core; this is the rate the lattice sees.
    pub p_z: f64,
    /// Z errors on two or more neighbouring cores at once.
    pub p_corr_same_sublattice: f64,
    /// Z error on the core together with one on a neighbouring core.
    pub p_corr_cross_sublattice: f64,
    pub bond_missing_prob: f64,
    /// 95% intervals, in the same order as the rates above.
    pub ci_x: (f64, f64),
    pub ci_z: (f64, f64),
    pub ci_same: (f64, f64),
    pub ci_cross: (f64, f64),
    pub ci_bond: (f64, f64),
    pub samples: u64,
}

#[derive(Default)]
struct Tally {
    x: u64,
    z: u64,
    same: u64,
    cross: u64,
}

impl Tally {
    fn add(&mut self, f: &FaultRecord) {
        let zb = (0..4).filter(|&d| f.z_neighbour(d)).count();
        self.x += f.x_core() as u64;
        self.z += f.z_core() as u64;
        self.same += (zb >= 2) as u64;
        self.cross += (f.z_core() && zb >= 1) as u64;
    }
}

/// Channels of one trace split by noise source.
struct Channels {
    by_source: [Vec<ChannelEffect>; 2],
}

impl Channels {
    fn new(effects: Vec<ChannelEffect>) -> Self {
        let mut by_source = [Vec::new(), Vec::new()];
        for e in effects {
            if !e.is_silent() {
                by_source[source_index(e.source)].push(e);
            }
        }
        Channels { by_source }
    }

    /// Fires each channel independently, skipping ahead geometrically.
    fn sample<R: Rng + ?Sized>(&self, p: [f64; 2], rng: &mut R) -> FaultRecord {
        let mut rec = FaultRecord::default();
        for (list, &p) in self.by_source.iter().zip(&p) {
            if p <= 0.0 {
                continue;
            }
            let mut fire = |e: &ChannelEffect, rng: &mut R| {
                let k = rng.gen_range(0..e.support.num_paulis());
                rec.bits ^= e.flip_mask(k);
                rec.faults += 1;
            };
            if p >= 1.0 {
                list.iter().for_each(|e| fire(e, rng));
                continue;
            }
            let log_q = (-p).ln_1p();
            let mut i = 0usize;
            loop {
                let u: f64 = 1.0 - rng.gen::<f64>();
                let skip = (u.ln() / log_q).floor();
                if skip >= (list.len() - i.min(list.len())) as f64 {
                    break;
                }
                i += skip as usize;
                fire(&list[i], rng);
                i += 1;
            }
        }
        rec
    }
}

fn source_index(s: NoiseSource) -> usize {
    match s {
        NoiseSource::Gate => 0,
        NoiseSource::Memory => 1,
    }
}

/// Fault draws sharing one sampled fusion history.
const DRAWS_PER_TRACE: u64 = 16;

/// Monte Carlo over fusion histories and sampled faults. The growth
/// history that survives is the same for every run of a plan, so only
/// fusion outcomes and faults are random.
pub fn estimate_error_profile<R: Rng + ?Sized>(
    s: &GrowthStrategy,
    m: &EOModel,
    samples: u64,
    rng: &mut R,
) -> Result<NodeErrorProfile, GrowthError> {
    m.validate()?;
    s.validate()?;
    if samples == 0 {
        return Err(GrowthError::InvalidArgument("samples must be at least 1".into()));
    }
    let mut tally = Tally::default();
    let (mut missing, mut bonds) = (0u64, 0u64);
    let mut channels = None;
    for i in 0..samples {
        if i % DRAWS_PER_TRACE == 0 {
            let outcomes = sample_attempts(s.attempts_n, m.p_h, rng);
            missing += outcomes.iter().filter(|o| o.is_none()).count() as u64;
            bonds += 4;
            let nc = node_circuit(s, m.fusion_kind(), outcomes)?;
            channels = Some(Channels::new(nc.circuit.channel_effects(&nc.observables())));
        }
        let ch = channels.as_ref().expect("set on first sample");
        tally.add(&ch.sample([m.p_g, m.p_m], rng));
    }
    let rate = |k: u64| k as f64 / samples as f64;
    Ok(NodeErrorProfile {
        p_x: rate(tally.x),
        p_z: rate(tally.z),
        p_corr_same_sublattice: rate(tally.same),
        p_corr_cross_sublattice: rate(tally.cross),
        bond_missing_prob: missing as f64 / bonds as f64,
        ci_x: wilson_interval(tally.x, samples),
        ci_z: wilson_interval(tally.z, samples),
        ci_same: wilson_interval(tally.same, samples),
        ci_cross: wilson_interval(tally.cross, samples),
        ci_bond: wilson_interval(missing, bonds),
        samples,
    })
}

/// Number of tracked bits: core Z, core X, Z on each neighbour.
const BITS: usize = 6;
const PATTERNS: usize = 1 << BITS;

/// Exact fault statistics of one fusion history, independent of the
/// error rates: for every parity pattern `s`, how many channels of each
/// source and width have `n` Paulis that flip the parity of `s`.
#[derive(Clone, Debug)]
struct TraceTable {
    counts: Vec<[[[u32; 16]; 2]; 2]>,
}

impl TraceTable {
    fn new(effects: &[ChannelEffect]) -> Self {
        let mut counts = vec![[[[0u32; 16]; 2]; 2]; PATTERNS];
        let mut flips = [0usize; 15];
        for e in effects {
            if e.is_silent() {
                continue;
            }
            let k = e.support.num_paulis();
            for (j, f) in flips.iter_mut().take(k).enumerate() {
                *f = compress(e.flip_mask(j));
            }
            let src = source_index(e.source);
            let width = (k == 15) as usize;
            for (s, row) in counts.iter_mut().enumerate().skip(1) {
                let n = flips[..k]
                    .iter()
                    .filter(|&&f| (f & s).count_ones() % 2 == 1)
                    .count();
                if n > 0 {
                    row[src][width][n] += 1;
                }
            }
        }
        TraceTable { counts }
    }

    /// Distribution of the tracked bits at the given rates.
    fn distribution(&self, p: [f64; 2]) -> [f64; PATTERNS] {
        let mut chi = [1.0f64; PATTERNS];
        for (s, row) in self.counts.iter().enumerate().skip(1) {
            let mut v = 1.0f64;
            for src in 0..2 {
                for (width, k) in [(0usize, 3.0f64), (1, 15.0)] {
                    for (n, &c) in row[src][width].iter().enumerate() {
                        if c > 0 {
                            v *= (1.0 - 2.0 * p[src] * n as f64 / k).powi(c as i32);
                        }
                    }
                }
            }
            chi[s] = v;
        }
        // inverse Walsh-Hadamard transform
        let mut h = 1;
        while h < PATTERNS {
            for i in (0..PATTERNS).step_by(2 * h) {
                for j in i..i + h {
                    let (a, b) = (chi[j], chi[j + h]);
                    chi[j] = a + b;
                    chi[j + h] = a - b;
                }
            }
            h *= 2;
        }
        chi.map(|v| (v / PATTERNS as f64).max(0.0))
    }
}

/// Keeps core Z, core X and the neighbours' Z bits of a fault record.
fn compress(bits: u32) -> usize {
    let mut out = (bits & 3) as usize;
    for d in 0..4 {
        out |= ((bits >> (2 + 2 * d) & 1) as usize) << (2 + d);
    }
    out
}

/// Error profile of a strategy with faults summed out exactly and only
/// the fusion histories sampled. Building it is the expensive part; it
/// can then be evaluated at any gate and memory rate.
#[derive(Clone, Debug)]
pub struct ProfileTable {
    strategy: GrowthStrategy,
    p_h: f64,
    traces: Vec<TraceTable>,
    mean_rounds: f64,
}

impl ProfileTable {
    /// Samples `traces` fusion histories at heralded failure rate `p_h`.
    /// Histories are built in parallel from seeds derived from `seed`.
    pub fn build(
        s: &GrowthStrategy,
        fusion: EoKind,
        p_h: f64,
        traces: usize,
        seed: u64,
    ) -> Result<Self, GrowthError> {
        s.validate()?;
        EOModel::noiseless(p_h).validate()?;
        if traces == 0 {
            return Err(GrowthError::InvalidArgument("traces must be at least 1".into()));
        }
        let built: Result<Vec<(TraceTable, usize)>, GrowthError> = (0..traces)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[t as u64]));
                let outcomes = sample_attempts(s.attempts_n, p_h, &mut rng);
                let nc = node_circuit(s, fusion, outcomes)?;
                let effects = nc.circuit.channel_effects(&nc.observables());
                Ok((TraceTable::new(&effects), nc.rounds))
            })
            .collect();
        let built = built?;
        let mean_rounds = built.iter().map(|(_, r)| *r as f64).sum::<f64>() / traces as f64;
        Ok(ProfileTable {
            strategy: *s,
            p_h,
            traces: built.into_iter().map(|(t, _)| t).collect(),
            mean_rounds,
        })
    }

    pub fn strategy(&self) -> &GrowthStrategy {
        &self.strategy
    }

    pub fn mean_rounds(&self) -> f64 {
        self.mean_rounds
    }

    /// Profile at the given rates. Intervals reflect the spread over
    /// sampled histories; the bond rate is exact.
    pub fn evaluate(&self, p_g: f64, p_m: f64) -> NodeErrorProfile {
        let n = self.traces.len() as f64;
        let mut sums = [[0.0f64; 2]; 4];
        for t in &self.traces {
            let dist = t.distribution([p_g, p_m]);
            let mut ev = [0.0f64; 4];
            for (y, &pr) in dist.iter().enumerate() {
                let zb = (y >> 2).count_ones();
                if y & 2 != 0 {
                    ev[0] += pr;
                }
                if y & 1 != 0 {
                    ev[1] += pr;
                }
                if zb >= 2 {
                    ev[2] += pr;
                }
                if y & 1 != 0 && zb >= 1 {
                    ev[3] += pr;
                }
            }
            for (acc, v) in sums.iter_mut().zip(ev) {
                acc[0] += v;
                acc[1] += v * v;
            }
        }
        let stat = |a: [f64; 2]| {
            let mean = a[0] / n;
            let var = if n > 1.0 {
                ((a[1] - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            let half = 1.96 * (var / n).sqrt();
            (mean, ((mean - half).max(0.0), (mean + half).min(1.0)))
        };
        let (p_x, ci_x) = stat(sums[0]);
        let (p_z, ci_z) = stat(sums[1]);
        let (same, ci_same) = stat(sums[2]);
        let (cross, ci_cross) = stat(sums[3]);
        let bond = self.p_h.powi(self.strategy.attempts_n as i32);
        NodeErrorProfile {
            p_x,
            p_z,
            p_corr_same_sublattice: same,
            p_corr_cross_sublattice: cross,
            bond_missing_prob: bond,
            ci_x,
            ci_z,
            ci_same,
            ci_cross,
            ci_bond: (bond, bond),
            samples: self.traces.len() as u64,
        }
    }
}

/// Size of the resource one node needs to reach a bond failure target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceSize {
    pub attempts_n: usize,
    pub leaves_per_direction: usize,
    /// Fresh qubits in the finished resource.
    pub total_qubits: usize,
    pub strategy: GrowthStrategy,
}

/// Smallest number of attempts with `p_h^N <= target`, and the resource
/// that supplies them. `branching` is used by snowflakes only.
pub fn required_resource_size(
    kind: StrategyKind,
    branching: usize,
    p_h: f64,
    target_bond_fail: f64,
) -> Result<ResourceSize, GrowthError> {
    if !(target_bond_fail > 0.0 && target_bond_fail < 1.0) {
        return Err(GrowthError::InvalidArgument(format!(
            "target bond failure {target_bond_fail} outside (0, 1)"
        )));
    }
    if !(0.0..1.0).contains(&p_h) {
        return Err(GrowthError::InvalidArgument(format!("p_h = {p_h} outside [0, 1)")));
    }
    let n = attempts_for(p_h, target_bond_fail);
    let s = match kind {
        StrategyKind::Star => GrowthStrategy::star(n),
        StrategyKind::Cross => GrowthStrategy::cross(n),
        StrategyKind::Snowflake => GrowthStrategy::snowflake(branching, n),
    };
    let (plan, layout) = GrowthPlan::resource(&s)?;
    Ok(ResourceSize {
        attempts_n: n,
        leaves_per_direction: s.leaves_per_direction(),
        total_qubits: plan.raw_size(layout.root),
        strategy: s,
    })
}

pub(crate) fn attempts_for(p_h: f64, target: f64) -> usize {
    if p_h <= 0.0 {
        return 1;
    }
    let mut n = ((target.ln() / p_h.ln()).ceil() as usize).max(1);
    while n > 1 && p_h.powi(n as i32 - 1) <= target {
        n -= 1;
    }
    while p_h.powi(n as i32) > target {
        n += 1;
    }
    n
}
