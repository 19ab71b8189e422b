//! CSV records with fixed headers, and the JSON metadata sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Rounds to 9 significant digits, the precision written to CSV.
pub fn q9(x: f64) -> f64 {
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn num(x: f64) -> String {
    format!("{}", q9(x))
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A row of one of the output tables.
pub trait Record: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SweepRecord {
    pub p_h: Option<f64>,
    pub p_G: Option<f64>,
    pub p_M: Option<f64>,
    pub p_bond: Option<f64>,
    pub p_loss: f64,
    pub p_err: f64,
    pub L: usize,
    pub trials: u64,
    pub failures: u64,
    pub fail_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl Record for SweepRecord {
    const HEADER: &'static [&'static str] = &[
        "p_h", "p_G", "p_M", "p_bond", "p_loss", "p_err", "L", "trials", "failures", "fail_rate",
        "ci_low", "ci_high", "seed",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            opt(self.p_h),
            opt(self.p_G),
            opt(self.p_M),
            opt(self.p_bond),
            num(self.p_loss),
            num(self.p_err),
            self.L.to_string(),
            self.trials.to_string(),
            self.failures.to_string(),
            num(self.fail_rate),
            num(self.ci_low),
            num(self.ci_high),
            self.seed.to_string(),
        ]
    }
}

impl From<&herald_tpc::threshold::SweepRow> for SweepRecord {
    fn from(r: &herald_tpc::threshold::SweepRow) -> Self {
        SweepRecord {
            p_h: r.p_h.map(q9),
            p_G: r.p_g.map(q9),
            p_M: r.p_m.map(q9),
            p_bond: r.p_bond.map(q9),
            p_loss: q9(r.p_loss),
            p_err: q9(r.p_err),
            L: r.size,
            trials: r.trials,
            failures: r.failures,
            fail_rate: q9(r.fail_rate),
            ci_low: q9(r.ci_low),
            ci_high: q9(r.ci_high),
            seed: r.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub p_loss: f64,
    pub p_err_max: f64,
    pub ci: f64,
    pub seed: u64,
}

impl Record for RegionRecord {
    const HEADER: &'static [&'static str] = &["p_loss", "p_err_max", "ci", "seed"];
    fn fields(&self) -> Vec<String> {
        vec![num(self.p_loss), num(self.p_err_max), num(self.ci), self.seed.to_string()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct PhaseRecord {
    pub strategy: String,
    pub p_h: f64,
    pub p_G_max: f64,
    pub attempts_N: usize,
    pub resource_qubits: usize,
    pub seed: u64,
}

impl Record for PhaseRecord {
    const HEADER: &'static [&'static str] =
        &["strategy", "p_h", "p_G_max", "attempts_N", "resource_qubits", "seed"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.strategy.clone(),
            num(self.p_h),
            num(self.p_G_max),
            self.attempts_N.to_string(),
            self.resource_qubits.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct GrowRecord {
    pub strategy: String,
    pub p_h: f64,
    pub p_G: f64,
    pub p_M: f64,
    pub mean_cost: f64,
    pub cost_ci: f64,
    pub p_x: f64,
    pub p_z: f64,
    pub p_corr_same: f64,
    pub p_corr_cross: f64,
    pub bond_missing: f64,
    pub seed: u64,
}

impl Record for GrowRecord {
    const HEADER: &'static [&'static str] = &[
        "strategy", "p_h", "p_G", "p_M", "mean_cost", "cost_ci", "p_x", "p_z", "p_corr_same",
        "p_corr_cross", "bond_missing", "seed",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.strategy.clone(),
            num(self.p_h),
            num(self.p_G),
            num(self.p_M),
            num(self.mean_cost),
            num(self.cost_ci),
            num(self.p_x),
            num(self.p_z),
            num(self.p_corr_same),
            num(self.p_corr_cross),
            num(self.bond_missing),
            self.seed.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ResourceRecord {
    pub strategy: String,
    pub p_h: f64,
    pub target_bond_fail: f64,
    pub attempts_N: usize,
    pub leaves_per_direction: usize,
    pub total_qubits: usize,
}

impl Record for ResourceRecord {
    const HEADER: &'static [&'static str] = &[
        "strategy", "p_h", "target_bond_fail", "attempts_N", "leaves_per_direction", "total_qubits",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.strategy.clone(),
            num(self.p_h),
            num(self.target_bond_fail),
            self.attempts_N.to_string(),
            self.leaves_per_direction.to_string(),
            self.total_qubits.to_string(),
        ]
    }
}

/// CSV text with the record's header and one line per row.
pub fn to_csv<R: Record>(rows: &[R]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(R::HEADER).expect("in-memory write");
    for r in rows {
        w.write_record(r.fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn write_csv<R: Record>(rows: &[R], path: &Path) -> Result<(), CliError> {
    std::fs::write(path, to_csv(rows))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Parses a file written by [`write_csv`], checking the header.
pub fn read_csv<R: Record>(path: &Path) -> Result<Vec<R>, CliError> {
    let bad = |e: String| CliError::Config(format!("{}: {e}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header: Vec<String> = rd
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != R::HEADER {
        return Err(bad(format!("header {header:?} does not match {:?}", R::HEADER)));
    }
    rd.deserialize().map(|r| r.map_err(|e| bad(e.to_string()))).collect()
}

/// Where the metadata for an output file goes.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_json(path: &Path, v: &serde_json::Value) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    serde_json::to_writer_pretty(&mut f, v)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(f).map_err(|e| CliError::Runtime(e.to_string()))
}
