use serde::{Deserialize, Serialize};

use super::{SweepResult, SweepRow, ThresholdError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub rate: f64,
    pub trials: u64,
}

/// Failure rate against one swept parameter at a fixed lattice size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub size: usize,
    pub points: Vec<CurvePoint>,
}

/// Which column of a sweep is the horizontal axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    PLoss,
    PErr,
}

impl SweepResult {
    /// One curve per lattice size, ordered by size, with points sorted
    /// along `axis`.
    pub fn curves(&self, axis: Axis) -> Vec<Curve> {
        curves_from_rows(&self.rows, axis)
    }
}

pub(crate) fn curves_from_rows(rows: &[SweepRow], axis: Axis) -> Vec<Curve> {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|l| {
            let mut points: Vec<CurvePoint> = rows
                .iter()
                .filter(|r| r.size == l)
                .map(|r| CurvePoint {
                    x: match axis {
                        Axis::PLoss => r.p_loss,
                        Axis::PErr => r.p_err,
                    },
                    rate: r.fail_rate,
                    trials: r.trials,
                })
                .collect();
            points.sort_by(|a, b| a.x.total_cmp(&b.x));
            Curve { size: l, points }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub sizes: (usize, usize),
    pub value: f64,
    /// Standard error from the binomial noise at the bracketing points.
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    /// Mean over size pairs.
    pub threshold: f64,
    /// Half the range over size pairs.
    pub uncertainty: f64,
    pub pairs: Vec<PairCrossing>,
}

impl CrossingEstimate {
    /// True when every two pair crossings agree within their combined
    /// 95% intervals.
    pub fn pairs_consistent(&self) -> bool {
        self.pairs.iter().enumerate().all(|(i, a)| {
            self.pairs[i + 1..].iter().all(|b| {
                (a.value - b.value).abs() <= 1.96 * (a.sigma.powi(2) + b.sigma.powi(2)).sqrt()
            })
        })
    }
}

fn variance(p: &CurvePoint) -> f64 {
    p.rate * (1.0 - p.rate) / p.trials.max(1) as f64
}

/// Crossing of one pair of curves sampled on the same grid.
fn pair_crossing(small: &Curve, large: &Curve) -> Option<PairCrossing> {
    // differences at grid points where both curves have data
    let mut d: Vec<(f64, f64, f64)> = Vec::new();
    for a in &small.points {
        if let Some(b) = large.points.iter().find(|b| b.x == a.x) {
            let diff = b.rate - a.rate;
            if diff != 0.0 {
                d.push((a.x, diff, variance(a) + variance(b)));
            }
        }
    }
    // Among the upward sign changes, keep the one that classifies most
    // grid points correctly: negative below, positive above.
    let neg_before: Vec<usize> = d
        .iter()
        .scan(0, |n, p| {
            *n += usize::from(p.1 < 0.0);
            Some(*n)
        })
        .collect();
    let pos_total = d.iter().filter(|p| p.1 > 0.0).count();
    let mut best: Option<(usize, usize)> = None;
    for i in 0..d.len().saturating_sub(1) {
        if d[i].1 < 0.0 && d[i + 1].1 > 0.0 {
            let pos_before = i + 1 - neg_before[i];
            let score = neg_before[i] + pos_total - pos_before;
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, i));
            }
        }
    }
    let (_, i) = best?;
    let (x0, d0, v0) = d[i];
    let (x1, d1, v1) = d[i + 1];
    let slope = (d1 - d0) / (x1 - x0);
    let value = x0 - d0 / slope;
    let sigma = (0.5 * (v0 + v1)).sqrt() / slope;
    Some(PairCrossing {
        sizes: (small.size, large.size),
        value,
        sigma,
    })
}

/// Threshold from curves at two or more sizes: each adjacent pair of
/// sizes contributes the point where the larger lattice stops doing
/// better, by linear interpolation of the rate difference.
pub fn estimate_crossing(curves: &[Curve]) -> Result<CrossingEstimate, ThresholdError> {
    if curves.len() < 2 {
        return Err(ThresholdError::Config("crossing needs at least two sizes".into()));
    }
    let mut sorted: Vec<&Curve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.size);
    for w in sorted.windows(2) {
        if w[0].points.len() < 3 || w[1].points.len() < 3 {
            return Err(ThresholdError::Config("crossing needs at least three grid points".into()));
        }
        if pair_crossing(w[0], w[1]).is_none() {
            return Err(ThresholdError::NoCrossing(format!("sizes {} and {}", w[0].size, w[1].size)));
        }
    }
    Ok(crossing_of(curves).expect("every pair crosses"))
}

/// As [`estimate_crossing`] without the input checks; `None` when some
/// pair has no crossing.
pub(crate) fn crossing_of(curves: &[Curve]) -> Option<CrossingEstimate> {
    let mut sorted: Vec<&Curve> = curves.iter().collect();
    sorted.sort_by_key(|c| c.size);
    if sorted.len() < 2 {
        return None;
    }
    let pairs: Vec<PairCrossing> = sorted
        .windows(2)
        .map(|w| pair_crossing(w[0], w[1]))
        .collect::<Option<_>>()?;
    let n = pairs.len() as f64;
    let threshold = pairs.iter().map(|p| p.value).sum::<f64>() / n;
    let lo = pairs.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    Some(CrossingEstimate {
        threshold,
        uncertainty: 0.5 * (hi - lo),
        pairs,
    })
}
