//! One function per subcommand. Each returns its table and the extra
//! metadata for the sidecar; writing happens in the caller.

use std::path::Path;

use herald_tpc::decoder::DecodeFlags;
use herald_tpc::growth::{
    expected_cost, required_resource_size, sample_cost, EOModel, EoKind, GrowthStrategy,
    ProfileTable, StrategyKind,
};
use herald_tpc::pauli::{verify_all_bonds, verify_supercheck_identity};
use herald_tpc::stats::derive_seed;
use herald_tpc::threshold::{
    correctable_region, estimate_crossing, memory_effect, run_sweep, with_workers, Axis,
    CorrectableRegion, GrowthParams, PhaseConfig, PhaseDiagramResult, RegionConfig, SweepConfig,
    SweepPoint,
};
use serde_json::{json, Value};

use crate::config::Params;
use crate::output::{
    q9, read_csv, sidecar_path, to_csv, GrowRecord, PhaseRecord, RegionRecord, ResourceRecord,
    SweepRecord,
};
use crate::CliError;

/// Above this many simulated qubits the mean cost comes from the
/// recursion instead of sampling.
const COST_SAMPLING_LIMIT: f64 = 2e8;

pub struct Outcome {
    /// CSV text, if the subcommand produces a table.
    pub csv: Option<String>,
    /// Lines for standard output.
    pub lines: Vec<String>,
    pub extra: Value,
    pub passed: bool,
}

impl Outcome {
    fn table(csv: String, extra: Value) -> Self {
        Outcome {
            csv: Some(csv),
            lines: Vec::new(),
            extra,
            passed: true,
        }
    }
}

fn cfg_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn kind(p: &Params) -> Result<StrategyKind, CliError> {
    p.strategy
        .as_deref()
        .unwrap_or("snowflake")
        .parse()
        .map_err(|e| CliError::Config(format!("strategy: {e}")))
}

fn fusion(p: &Params) -> Result<EoKind, CliError> {
    match p.fusion.as_deref().unwrap_or("parity_projection") {
        "parity_projection" => Ok(EoKind::ParityProjection),
        "control_phase" => Ok(EoKind::ControlPhase),
        other => Err(CliError::Config(format!(
            "fusion: {other:?} is not parity_projection or control_phase"
        ))),
    }
}

/// Single growth shape at `p_h`, from `attempts_N` or the first target.
fn shape(p: &Params, p_h: f64) -> Result<GrowthStrategy, CliError> {
    let k = kind(p)?;
    let b = p.branching.as_ref().and_then(|v| v.first().copied()).unwrap_or(2);
    let n = match (p.attempts_n, p.target.as_ref().and_then(|t| t.first())) {
        (Some(n), _) => n,
        (None, Some(&t)) => required_resource_size(k, b, p_h, t).map_err(cfg_err)?.attempts_n,
        (None, None) => return Err(CliError::Config("give attempts_N or target".into())),
    };
    let s = match (k, p.depth) {
        (StrategyKind::Star, _) => GrowthStrategy::star(n),
        (StrategyKind::Cross, _) => GrowthStrategy::cross(n),
        (StrategyKind::Snowflake, Some(d)) => GrowthStrategy::snowflake_with_depth(b, d, n),
        (StrategyKind::Snowflake, None) => GrowthStrategy::snowflake(b, n),
    };
    s.validate().map_err(cfg_err)?;
    Ok(s)
}

pub fn verify(p: &Params) -> Result<Outcome, CliError> {
    let sizes = p.sizes.clone().unwrap_or_else(|| vec![2, 3]);
    let mut lines = Vec::new();
    let mut passed = true;
    let mut detail = Vec::new();
    for &l in &sizes {
        let intact = verify_supercheck_identity(l, None).map_err(run_err)?;
        let r = verify_all_bonds(l).map_err(run_err)?;
        let ok = intact && r.passed();
        passed &= ok;
        lines.push(format!(
            "{} supercheck identity L={l}: {} bonds, {} failures",
            if ok { "PASS" } else { "FAIL" },
            r.bonds_checked,
            r.failures.len()
        ));
        detail.push(json!({"L": l, "bonds_checked": r.bonds_checked, "failures": r.failures, "intact": intact}));
    }
    Ok(Outcome {
        csv: None,
        lines,
        extra: json!({ "checks": detail }),
        passed,
    })
}

pub fn resource_size(p: &Params) -> Result<Outcome, CliError> {
    let k = kind(p)?;
    let targets = p
        .target
        .clone()
        .ok_or_else(|| CliError::Config("resource-size needs target".into()))?;
    let p_hs = p.p_h.clone().ok_or_else(|| CliError::Config("resource-size needs p_h".into()))?;
    let branchings = match k {
        StrategyKind::Snowflake => p.branching.clone().unwrap_or_else(|| vec![2]),
        _ => vec![1],
    };
    let mut rows = Vec::new();
    for &p_h in &p_hs {
        for &t in &targets {
            for &b in &branchings {
                let r = required_resource_size(k, b, p_h, t).map_err(cfg_err)?;
                rows.push(ResourceRecord {
                    strategy: r.strategy.label(),
                    p_h: q9(p_h),
                    target_bond_fail: q9(t),
                    attempts_N: r.attempts_n,
                    leaves_per_direction: r.leaves_per_direction,
                    total_qubits: r.total_qubits,
                });
            }
        }
    }
    Ok(Outcome::table(to_csv(&rows), json!({})))
}

pub fn grow(p: &Params) -> Result<Outcome, CliError> {
    let seed = p.seed.unwrap_or(0);
    let fusion = fusion(p)?;
    let p_hs = p.p_h.clone().unwrap_or_else(|| vec![0.9]);
    let p_gs = p.p_g.clone().unwrap_or_else(|| vec![1e-4]);
    let p_ms = p.p_m.clone().unwrap_or_else(|| vec![0.0]);
    let traces = p.traces.unwrap_or(16);
    let runs = p.cost_runs.unwrap_or(200);
    let mut rows = Vec::new();
    let mut costs = Vec::new();
    for (i, &p_h) in p_hs.iter().enumerate() {
        let s = shape(p, p_h)?;
        let expect = expected_cost(&s, p_h).map_err(run_err)?;
        let sampled = expect * runs as f64 <= COST_SAMPLING_LIMIT && runs > 0;
        let (mean, ci) = if sampled {
            with_workers(p.workers, || sample_cost(&s, p_h, runs, derive_seed(seed, &[1, i as u64])))
                .map_err(run_err)?
                .map_err(run_err)?
        } else {
            (expect, 0.0)
        };
        costs.push(json!({
            "p_h": p_h, "shape": s, "expected_cost": expect,
            "cost_method": if sampled { "sampled" } else { "recursion" },
        }));
        let table = with_workers(p.workers, || {
            ProfileTable::build(&s, fusion, p_h, traces, derive_seed(seed, &[2, i as u64]))
        })
        .map_err(run_err)?
        .map_err(run_err)?;
        for &p_g in &p_gs {
            for &p_m in &p_ms {
                EOModel::new(p_h, p_g, p_m).map_err(cfg_err)?;
                let prof = table.evaluate(p_g, p_m);
                rows.push(GrowRecord {
                    strategy: s.label(),
                    p_h: q9(p_h),
                    p_G: q9(p_g),
                    p_M: q9(p_m),
                    mean_cost: q9(mean),
                    cost_ci: q9(ci),
                    p_x: q9(prof.p_x),
                    p_z: q9(prof.p_z),
                    p_corr_same: q9(prof.p_corr_same_sublattice),
                    p_corr_cross: q9(prof.p_corr_cross_sublattice),
                    bond_missing: q9(prof.bond_missing_prob),
                    seed,
                });
            }
        }
    }
    Ok(Outcome::table(to_csv(&rows), json!({ "costs": costs, "traces": traces })))
}

fn sweep_points(p: &Params) -> Result<Vec<SweepPoint>, CliError> {
    if let Some(p_hs) = &p.p_h {
        if p.p_loss.is_some() || p.p_bond.is_some() || p.p_err.is_some() {
            return Err(CliError::Config(
                "growth sweeps take loss and error from p_h, p_G and p_M; drop p_loss, p_bond and p_err".into(),
            ));
        }
        let fusion = fusion(p)?;
        let seed = p.seed.unwrap_or(0);
        let traces = p.traces.unwrap_or(8);
        let p_gs = p.p_g.clone().ok_or_else(|| CliError::Config("growth sweeps need p_G".into()))?;
        let p_ms = p.p_m.clone().unwrap_or_else(|| vec![0.0]);
        let mut points = Vec::new();
        for (i, &p_h) in p_hs.iter().enumerate() {
            let s = shape(p, p_h)?;
            for &p_g in &p_gs {
                for &p_m in &p_ms {
                    let g = GrowthParams { p_h, p_g, p_m };
                    let pt = with_workers(p.workers, || {
                        SweepPoint::from_growth(&s, fusion, g, traces, derive_seed(seed, &[3, i as u64]))
                    })
                    .map_err(run_err)?
                    .map_err(run_err)?;
                    points.push(pt);
                }
            }
        }
        return Ok(points);
    }
    let errs = p.p_err.clone().unwrap_or_else(|| vec![0.0]);
    let points = match (&p.p_loss, &p.p_bond) {
        (Some(_), Some(_)) => return Err(CliError::Config("give p_loss or p_bond, not both".into())),
        (_, Some(bonds)) => bonds
            .iter()
            .flat_map(|&b| errs.iter().map(move |&e| SweepPoint::bond_loss(b, e)))
            .collect(),
        (loss, None) => loss
            .clone()
            .unwrap_or_else(|| vec![0.0])
            .iter()
            .flat_map(|&l| errs.iter().map(move |&e| SweepPoint::qubit_loss(l, e)))
            .collect(),
    };
    Ok(points)
}

pub fn lattice_sweep(p: &Params) -> Result<Outcome, CliError> {
    let cfg = SweepConfig {
        sizes: p.sizes.clone().unwrap_or_else(|| vec![4, 6, 8]),
        points: sweep_points(p)?,
        trials: p.trials.unwrap_or(1000),
        seed: p.seed.unwrap_or(0),
        workers: p.workers,
        flags: DecodeFlags {
            both_sublattices: p.both_sublattices.unwrap_or(false),
            ..DecodeFlags::default()
        },
    };
    cfg.validate().map_err(cfg_err)?;
    let result = run_sweep(&cfg).map_err(run_err)?;
    let rows: Vec<SweepRecord> = result.rows.iter().map(SweepRecord::from).collect();
    let mut crossings = serde_json::Map::new();
    for (name, axis) in [("p_err", Axis::PErr), ("p_loss", Axis::PLoss)] {
        let distinct = |f: fn(&SweepPoint) -> f64| {
            let mut v: Vec<u64> = cfg.points.iter().map(|x| f(x).to_bits()).collect();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        let (along, other) = match axis {
            Axis::PErr => (distinct(|x| x.p_err), distinct(|x| x.p_loss())),
            Axis::PLoss => (distinct(|x| x.p_loss()), distinct(|x| x.p_err)),
        };
        if along >= 3 && other == 1 && cfg.sizes.len() >= 2 {
            let v = match estimate_crossing(&result.curves(axis)) {
                Ok(c) => json!({ "estimate": c, "pairs_consistent": c.pairs_consistent() }),
                Err(e) => json!({ "error": e.to_string() }),
            };
            crossings.insert(name.into(), v);
        }
    }
    Ok(Outcome::table(to_csv(&rows), json!({ "crossing": crossings })))
}

fn region_config(p: &Params) -> RegionConfig {
    RegionConfig {
        sizes: p.sizes.clone().unwrap_or_else(|| vec![4, 6, 8]),
        loss_grid: p
            .p_loss
            .clone()
            .unwrap_or_else(|| (0..12).map(|i| 0.025 * i as f64).collect()),
        err_grid: p
            .p_err
            .clone()
            .unwrap_or_else(|| (0..26).map(|i| 0.002 * i as f64).collect()),
        trials: p.trials.unwrap_or(1000),
        seed: p.seed.unwrap_or(0),
        workers: p.workers,
    }
}

fn region_extra(r: &CorrectableRegion) -> Value {
    json!({
        "loss_threshold": r.loss_threshold,
        "loss_step": r.loss_step,
        "err_step": r.err_step,
        "columns": r.columns,
    })
}

fn region_records(r: &CorrectableRegion) -> Vec<RegionRecord> {
    r.columns
        .iter()
        .map(|c| RegionRecord {
            p_loss: q9(c.p_loss),
            p_err_max: q9(c.p_err_max),
            ci: q9(c.ci),
            seed: r.seed,
        })
        .collect()
}

pub fn region(p: &Params) -> Result<Outcome, CliError> {
    let cfg = region_config(p);
    cfg.validate().map_err(cfg_err)?;
    let r = correctable_region(&cfg).map_err(run_err)?;
    Ok(Outcome::table(to_csv(&region_records(&r)), region_extra(&r)))
}

/// Region from a file written by `region`, with its sidecar.
pub fn load_region(path: &Path) -> Result<CorrectableRegion, CliError> {
    let rows: Vec<RegionRecord> = read_csv(path)?;
    let meta_path = sidecar_path(path);
    let text = std::fs::read_to_string(&meta_path)
        .map_err(|e| CliError::Config(format!("region metadata {}: {e}", meta_path.display())))?;
    let meta: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("region metadata {}: {e}", meta_path.display())))?;
    let extra = &meta["extra"];
    let step = |k: &str| {
        extra[k]
            .as_f64()
            .ok_or_else(|| CliError::Config(format!("region metadata lacks {k}")))
    };
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.p_loss, r.p_err_max)).collect();
    Ok(CorrectableRegion::from_boundary(
        &points,
        extra["loss_threshold"].as_f64(),
        step("loss_step")?,
        step("err_step")?,
    ))
}

fn phase_inputs(p: &Params) -> Result<(PhaseConfig, CorrectableRegion, Value), CliError> {
    let k = kind(p)?;
    let mut cfg = PhaseConfig::new(
        k,
        p.p_h
            .clone()
            .unwrap_or_else(|| vec![0.5, 0.6, 0.7, 0.8, 0.85, 0.9, 0.92, 0.94, 0.96, 0.98]),
    );
    if let Some(b) = &p.branching {
        cfg.branchings = b.clone();
    }
    if let Some(t) = &p.target {
        cfg.targets = t.clone();
    }
    cfg.fusion = fusion(p)?;
    cfg.traces = p.traces.unwrap_or(cfg.traces);
    cfg.seed = p.seed.unwrap_or(0);
    cfg.workers = p.workers;
    cfg.validate().map_err(cfg_err)?;
    let region = match &p.region {
        Some(path) => {
            if p.sizes.is_some() || p.p_loss.is_some() || p.p_err.is_some() || p.trials.is_some() {
                return Err(CliError::Config(
                    "region grid flags conflict with a region file".into(),
                ));
            }
            load_region(path)?
        }
        None => {
            let rc = region_config(p);
            rc.validate().map_err(cfg_err)?;
            correctable_region(&rc).map_err(run_err)?
        }
    };
    let extra = region_extra(&region);
    Ok((cfg, region, extra))
}

fn phase_records(r: &PhaseDiagramResult, label: Option<&str>) -> Vec<PhaseRecord> {
    r.rows
        .iter()
        .map(|row| PhaseRecord {
            strategy: label.map_or_else(|| row.strategy.clone(), str::to_string),
            p_h: q9(row.p_h),
            p_G_max: q9(row.p_g_max),
            attempts_N: row.attempts_n,
            resource_qubits: row.resource_qubits,
            seed: row.seed,
        })
        .collect()
}

pub fn phase_diagram(p: &Params) -> Result<Outcome, CliError> {
    let (cfg, region, region_meta) = phase_inputs(p)?;
    let r = memory_effect(&cfg, &region, 0.0).map_err(run_err)?;
    Ok(Outcome::table(
        to_csv(&phase_records(&r, None)),
        json!({ "region": region_meta, "rows": r.rows }),
    ))
}

pub fn memory(p: &Params) -> Result<Outcome, CliError> {
    let (cfg, region, region_meta) = phase_inputs(p)?;
    let ratios = p.ratio.clone().unwrap_or_else(|| vec![0.0, 0.1]);
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    for &ratio in &ratios {
        let r = memory_effect(&cfg, &region, ratio).map_err(run_err)?;
        let label = format!("{}-mem{}", cfg.kind.label(), q9(ratio));
        rows.extend(phase_records(&r, Some(&label)));
        detail.push(json!({ "ratio": ratio, "label": label, "rows": r.rows }));
    }
    Ok(Outcome::table(
        to_csv(&rows),
        json!({ "region": region_meta, "runs": detail }),
    ))
}
