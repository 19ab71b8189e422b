//! Parameters shared by every subcommand, merged from a JSON file and
//! command-line flags.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Environment fallback for `--workers`.
pub const WORKERS_ENV: &str = "HERALD_TPC_WORKERS";

fn one_or_many<'de, D, T>(d: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match Option::<OneOrMany<T>>::deserialize(d)? {
        None => None,
        Some(OneOrMany::One(v)) => Some(vec![v]),
        Some(OneOrMany::Many(v)) => Some(v),
    })
}

/// Every flag of every subcommand. Keys of the JSON config file use the
/// same names; flags win over the file. Lists are comma separated on the
/// command line and arrays (or single values) in the file.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// JSON file with default values for any of these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// CSV output path; a metadata sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to HERALD_TPC_WORKERS).
    #[arg(long)]
    pub workers: Option<usize>,

    /// star, cross or snowflake.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Snowflake branching factor(s).
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub branching: Option<Vec<usize>>,
    /// Snowflake depth (default: smallest that fits the attempts).
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long = "attempts_N")]
    #[serde(rename = "attempts_N")]
    pub attempts_n: Option<usize>,
    /// Target bond failure rate(s).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub target: Option<Vec<f64>>,
    /// parity_projection or control_phase, for fusion attempts.
    #[arg(long)]
    pub fusion: Option<String>,

    #[arg(long = "p_h", visible_alias = "ph", value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub p_h: Option<Vec<f64>>,
    #[arg(long = "p_G", visible_alias = "pg", value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(rename = "p_G", deserialize_with = "one_or_many")]
    pub p_g: Option<Vec<f64>>,
    #[arg(long = "p_M", visible_alias = "pm", value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(rename = "p_M", deserialize_with = "one_or_many")]
    pub p_m: Option<Vec<f64>>,
    #[arg(long = "p_bond", value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub p_bond: Option<Vec<f64>>,
    #[arg(long = "p_loss", value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub p_loss: Option<Vec<f64>>,
    #[arg(long = "p_err", value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub p_err: Option<Vec<f64>>,
    /// Lattice sizes.
    #[arg(long = "L", value_delimiter = ',')]
    #[serde(rename = "L", deserialize_with = "one_or_many")]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Decode the dual sublattice as well.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub both_sublattices: Option<bool>,

    /// Fusion histories sampled per error profile.
    #[arg(long)]
    pub traces: Option<usize>,
    /// Growth runs behind the mean cost.
    #[arg(long)]
    pub cost_runs: Option<u64>,
    /// Memory-to-gate error ratio(s).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    #[serde(deserialize_with = "one_or_many")]
    pub ratio: Option<Vec<f64>>,
    /// Region CSV written by the `region` subcommand.
    #[arg(long)]
    pub region: Option<PathBuf>,
}

/// Keys each subcommand accepts.
pub fn allowed_keys(command: &str) -> &'static [&'static str] {
    const GROWTH: &[&str] = &[
        "out", "seed", "workers", "strategy", "branching", "depth", "attempts_N", "target",
        "fusion", "p_h", "p_G", "p_M", "traces", "cost_runs",
    ];
    const SWEEP: &[&str] = &[
        "out", "seed", "workers", "L", "p_loss", "p_bond", "p_err", "trials",
        "both_sublattices", "strategy", "branching", "depth", "attempts_N", "target", "fusion",
        "p_h", "p_G", "p_M", "traces",
    ];
    const REGION: &[&str] = &["out", "seed", "workers", "L", "p_loss", "p_err", "trials"];
    const PHASE: &[&str] = &[
        "out", "seed", "workers", "strategy", "branching", "target", "fusion", "p_h", "traces",
        "region", "L", "p_loss", "p_err", "trials",
    ];
    const MEMORY: &[&str] = &[
        "out", "seed", "workers", "strategy", "branching", "target", "fusion", "p_h", "traces",
        "region", "L", "p_loss", "p_err", "trials", "ratio",
    ];
    match command {
        "verify" => &["out", "L"],
        "grow" => GROWTH,
        "resource-size" => &["out", "strategy", "branching", "p_h", "target"],
        "lattice-sweep" => SWEEP,
        "region" => REGION,
        "phase-diagram" => PHASE,
        "memory-effect" => MEMORY,
        _ => &[],
    }
}

fn read_file(path: &PathBuf) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: malformed JSON: {e}", path.display())))?;
    let Value::Object(obj) = v else {
        return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
    };
    for (k, v) in &obj {
        let mut single = Map::new();
        single.insert(k.clone(), v.clone());
        serde_json::from_value::<Params>(Value::Object(single))
            .map_err(|e| CliError::Config(format!("config key `{k}`: {e}")))?;
    }
    Ok(obj)
}

/// Merges the config file under the flags, applies the worker
/// environment fallback and checks ranges.
pub fn resolve(command: &str, flags: &Params) -> Result<Params, CliError> {
    let mut map = match &flags.config {
        Some(path) => read_file(path)?,
        None => Map::new(),
    };
    let Value::Object(given) = serde_json::to_value(flags).expect("params serialize") else {
        unreachable!()
    };
    for (k, v) in given {
        if !v.is_null() {
            map.insert(k, v);
        }
    }
    let allowed = allowed_keys(command);
    if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::Config(format!("`{k}` does not apply to {command}")));
    }
    let mut p: Params = serde_json::from_value(Value::Object(map))
        .map_err(|e| CliError::Config(e.to_string()))?;
    p.config = flags.config.clone();
    if p.workers.is_none() && allowed.contains(&"workers") {
        if let Ok(w) = std::env::var(WORKERS_ENV) {
            let n = w.trim().parse().map_err(|_| {
                CliError::Config(format!("{WORKERS_ENV} = {w:?} is not a worker count"))
            })?;
            p.workers = Some(n);
        }
    }
    p.validate()?;
    Ok(p)
}

impl Params {
    pub fn validate(&self) -> Result<(), CliError> {
        let probs = [
            ("p_h", &self.p_h),
            ("p_G", &self.p_g),
            ("p_M", &self.p_m),
            ("p_bond", &self.p_bond),
            ("p_loss", &self.p_loss),
            ("p_err", &self.p_err),
        ];
        for (name, list) in probs {
            for &p in list.iter().flatten() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(CliError::Config(format!("{name} = {p} outside [0, 1]")));
                }
            }
            if list.as_ref().is_some_and(|l| l.is_empty()) {
                return Err(CliError::Config(format!("{name} list is empty")));
            }
        }
        for &t in self.target.iter().flatten() {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::Config(format!("target = {t} outside (0, 1)")));
            }
        }
        for &r in self.ratio.iter().flatten() {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(CliError::Config(format!("ratio = {r} must be nonnegative")));
            }
        }
        let positive = [
            ("trials", self.trials.map(|v| v as usize)),
            ("workers", self.workers),
            ("traces", self.traces),
            ("attempts_N", self.attempts_n),
            ("depth", self.depth),
        ];
        for (name, v) in positive {
            if v == Some(0) {
                return Err(CliError::Config(format!("{name} must be at least 1")));
            }
        }
        if let Some(&l) = self.sizes.iter().flatten().find(|&&l| l < 2) {
            return Err(CliError::Config(format!("L = {l} below 2")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_file(json: &str, flags: Params, command: &str) -> Result<Params, CliError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, json).unwrap();
        let flags = Params {
            config: Some(path),
            ..flags
        };
        resolve(command, &flags)
    }

    #[test]
    fn file_values_and_flag_precedence() {
        let p = with_file(r#"{"p_h": 0.9, "trials": 50}"#, Params::default(), "lattice-sweep").unwrap();
        assert_eq!(p.p_h, Some(vec![0.9]));
        assert_eq!(p.trials, Some(50));
        let flags = Params {
            trials: Some(100),
            ..Params::default()
        };
        let p = with_file(r#"{"trials": 50}"#, flags, "lattice-sweep").unwrap();
        assert_eq!(p.trials, Some(100));
    }

    #[test]
    fn errors_name_the_key() {
        let e = with_file(r#"{"p_G": "high"}"#, Params::default(), "grow").unwrap_err();
        assert!(e.to_string().contains("p_G"), "{e}");
        let e = with_file(r#"{"bogus": 1}"#, Params::default(), "grow").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = with_file(r#"{"p_G": -0.1}"#, Params::default(), "grow").unwrap_err();
        assert!(e.to_string().contains("p_G"), "{e}");
        let e = with_file(r#"{"ratio": 0.1}"#, Params::default(), "grow").unwrap_err();
        assert!(e.to_string().contains("ratio"), "{e}");
        assert!(with_file("{not json", Params::default(), "grow").is_err());
    }
}
