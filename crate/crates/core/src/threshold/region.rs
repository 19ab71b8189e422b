use serde::{Deserialize, Serialize};

use super::crossing::{crossing_of, curves_from_rows, Axis};
use super::sweep::{build_lattices, check_prob, count_failures, with_workers};
use super::{SweepPoint, SweepRow, ThresholdError};
use crate::decoder::DecodeFlags;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub sizes: Vec<usize>,
    /// Qubit loss rates, one boundary value each.
    pub loss_grid: Vec<f64>,
    /// Error rates scanned upward in every column.
    pub err_grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl RegionConfig {
    pub fn validate(&self) -> Result<(), ThresholdError> {
        if self.trials == 0 || self.workers == Some(0) {
            return Err(ThresholdError::Config("trials and workers must be at least 1".into()));
        }
        if self.sizes.len() < 2 || self.sizes.iter().any(|&l| l < 2) {
            return Err(ThresholdError::Config("region needs two or more sizes, each at least 2".into()));
        }
        for (name, g) in [("loss grid", &self.loss_grid), ("error grid", &self.err_grid)] {
            if g.len() < 2 || g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(ThresholdError::Config(format!(
                    "{name} needs two or more increasing values"
                )));
            }
            g.iter().try_for_each(|&p| check_prob(name, p))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionColumn {
    pub p_loss: f64,
    /// Boundary after the monotone cleanup.
    pub p_err_max: f64,
    /// Boundary as estimated from this column alone.
    pub raw: f64,
    pub ci: f64,
    /// Why the column's estimate is not trustworthy, if it is not.
    pub flag: Option<String>,
}

/// Set of (loss, error) rates that the decoder corrects, described by
/// its upper boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectableRegion {
    pub columns: Vec<RegionColumn>,
    /// Where the boundary meets zero error, if the grid reaches it.
    pub loss_threshold: Option<f64>,
    pub loss_step: f64,
    pub err_step: f64,
    pub seed: u64,
    /// Counts behind the estimate.
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Trend {
    Decreasing,
    Increasing,
    Unclear,
}

/// Compares adjacent sizes at one point; a trend needs every pair to be
/// separated by its 95% intervals.
fn trend(rows: &[SweepRow]) -> Trend {
    let pairs: Vec<(&SweepRow, &SweepRow)> = rows.windows(2).map(|w| (&w[0], &w[1])).collect();
    if pairs.iter().all(|(s, l)| l.ci_high < s.ci_low) {
        Trend::Decreasing
    } else if pairs.iter().all(|(s, l)| l.ci_low > s.ci_high) {
        Trend::Increasing
    } else {
        Trend::Unclear
    }
}

fn max_gap(g: &[f64]) -> f64 {
    g.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Pool-adjacent-violators fit of a nonincreasing sequence.
pub fn isotonic_nonincreasing(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a >= b {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().unwrap();
            *last = ((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, n)| std::iter::repeat_n(v, n))
        .collect()
}

/// Maps the boundary column by column. Each column scans the error grid
/// upward until larger lattices clearly do worse; columns past the
/// first one that fails already at zero error are not simulated.
pub fn correctable_region(cfg: &RegionConfig) -> Result<CorrectableRegion, ThresholdError> {
    cfg.validate()?;
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    let lattices = build_lattices(&sizes)?;
    let flags = DecodeFlags::default();
    let n_err = cfg.err_grid.len() as u64;
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    // zero-error point of every simulated column
    let mut zero_row = Vec::new();
    let mut dead = false;
    for (ci, &p_loss) in cfg.loss_grid.iter().enumerate() {
        if dead {
            columns.push(RegionColumn {
                p_loss,
                p_err_max: 0.0,
                raw: 0.0,
                ci: 0.0,
                flag: None,
            });
            continue;
        }
        let mut col_rows: Vec<SweepRow> = Vec::new();
        let mut trends = Vec::new();
        for (j, &p_err) in cfg.err_grid.iter().enumerate() {
            let point = SweepPoint::qubit_loss(p_loss, p_err);
            let id = ci as u64 * n_err + j as u64;
            let counts = with_workers(cfg.workers, || {
                count_failures(&lattices, &[(id, point)], cfg.trials, cfg.seed, &flags)
            })??;
            let here: Vec<SweepRow> = sizes
                .iter()
                .zip(&counts[0])
                .map(|(&l, &f)| SweepRow::new(&point, l, cfg.trials, f, cfg.seed))
                .collect();
            let t = trend(&here);
            if j == 0 {
                zero_row.extend(here.iter().cloned());
            }
            col_rows.extend(here);
            trends.push(t);
            if t == Trend::Increasing {
                break;
            }
        }
        let scanned = trends.len();
        let last_below = trends.iter().rposition(|&t| t == Trend::Decreasing);
        let mut flag = None;
        let (raw, ci_half) = if trends[0] == Trend::Increasing {
            dead = true;
            (0.0, 0.0)
        } else {
            match crossing_of(&curves_from_rows(&col_rows, Axis::PErr)) {
                Some(c) => {
                    let sigma = (c.pairs.iter().map(|p| p.sigma * p.sigma).sum::<f64>()
                        / c.pairs.len() as f64)
                        .sqrt();
                    if trends[scanned - 1] != Trend::Increasing {
                        flag = Some("error grid ends before failures grow with size".into());
                    } else if last_below.is_none() {
                        flag = Some("no point where failures clearly drop with size".into());
                    }
                    (c.threshold, c.uncertainty.hypot(1.96 * sigma))
                }
                None => {
                    flag = Some("no crossing in the scanned errors".into());
                    (last_below.map_or(0.0, |j| cfg.err_grid[j]), 0.0)
                }
            }
        };
        rows.extend(col_rows);
        columns.push(RegionColumn {
            p_loss,
            p_err_max: raw,
            raw,
            ci: ci_half,
            flag,
        });
    }
    let loss_threshold = crossing_of(&curves_from_rows(&zero_row, Axis::PLoss)).map(|c| c.threshold);
    let mut region = CorrectableRegion {
        columns,
        loss_threshold,
        loss_step: max_gap(&cfg.loss_grid),
        err_step: max_gap(&cfg.err_grid),
        seed: cfg.seed,
        rows,
    };
    region.clean_up();
    Ok(region)
}

impl CorrectableRegion {
    /// Region from a boundary given directly, e.g. read back from disk.
    pub fn from_boundary(
        points: &[(f64, f64)],
        loss_threshold: Option<f64>,
        loss_step: f64,
        err_step: f64,
    ) -> Self {
        let mut region = CorrectableRegion {
            columns: points
                .iter()
                .map(|&(p_loss, v)| RegionColumn {
                    p_loss,
                    p_err_max: v,
                    raw: v,
                    ci: 0.0,
                    flag: None,
                })
                .collect(),
            loss_threshold,
            loss_step,
            err_step,
            seed: 0,
            rows: Vec::new(),
        };
        region.clean_up();
        region
    }

    /// Zeroes columns past the loss threshold and makes the rest
    /// nonincreasing.
    fn clean_up(&mut self) {
        let cut = self.loss_threshold.unwrap_or(f64::INFINITY);
        let raw: Vec<f64> = self
            .columns
            .iter()
            .map(|c| if c.p_loss >= cut { 0.0 } else { c.raw.max(0.0) })
            .collect();
        for (c, v) in self.columns.iter_mut().zip(isotonic_nonincreasing(&raw)) {
            c.p_err_max = v;
        }
    }

    fn knots(&self) -> Vec<(f64, f64)> {
        let cut = self.loss_threshold.unwrap_or(f64::INFINITY);
        let mut k: Vec<(f64, f64)> = self
            .columns
            .iter()
            .filter(|c| c.p_loss < cut)
            .map(|c| (c.p_loss, c.p_err_max))
            .collect();
        if let Some(t) = self.loss_threshold {
            k.push((t, 0.0));
        }
        k
    }

    /// Boundary error rate at `p_loss`, linear between columns and zero
    /// past the last one.
    pub fn boundary(&self, p_loss: f64) -> f64 {
        let k = self.knots();
        let Some(&(x0, y0)) = k.first() else {
            return 0.0;
        };
        if p_loss <= x0 {
            return y0;
        }
        for w in k.windows(2) {
            let ((xa, ya), (xb, yb)) = (w[0], w[1]);
            if p_loss <= xb {
                return ya + (yb - ya) * (p_loss - xa) / (xb - xa);
            }
        }
        0.0
    }

    /// Largest error rate accepted at `p_loss` once the point is kept one
    /// grid cell away from the boundary in both directions.
    pub fn max_error(&self, p_loss: f64) -> f64 {
        self.boundary(p_loss + self.loss_step) - self.err_step
    }

    pub fn contains(&self, p_loss: f64, p_err: f64) -> bool {
        p_err < self.max_error(p_loss)
    }

    /// Columns whose estimate carries a warning.
    pub fn flagged(&self) -> impl Iterator<Item = &RegionColumn> {
        self.columns.iter().filter(|c| c.flag.is_some())
    }
}
