//! Command-line driver: parses flags and config files, runs one
//! experiment and writes its CSV table with a JSON metadata sidecar.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::Params;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "herald-tpc", version, about = "Threshold experiments for grown topological cluster states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the supercheck identity for every single missing bond.
    Verify(Params),
    /// Growth cost and per-node error profile.
    Grow(Params),
    /// Attempts and resource qubits needed for a bond failure target.
    ResourceSize(Params),
    /// Logical failure rates over a grid of lattice parameters.
    LatticeSweep(Params),
    /// Boundary of the correctable (loss, error) region.
    Region(Params),
    /// Largest tolerable gate error rate per p_h.
    PhaseDiagram(Params),
    /// Phase diagram with memory errors proportional to gate errors.
    MemoryEffect(Params),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Grow(_) => "grow",
            Command::ResourceSize(_) => "resource-size",
            Command::LatticeSweep(_) => "lattice-sweep",
            Command::Region(_) => "region",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::MemoryEffect(_) => "memory-effect",
        }
    }

    fn params(&self) -> &Params {
        match self {
            Command::Verify(p)
            | Command::Grow(p)
            | Command::ResourceSize(p)
            | Command::LatticeSweep(p)
            | Command::Region(p)
            | Command::PhaseDiagram(p)
            | Command::MemoryEffect(p) => p,
        }
    }
}

fn dispatch(name: &str, p: &Params) -> Result<commands::Outcome, CliError> {
    match name {
        "verify" => commands::verify(p),
        "grow" => commands::grow(p),
        "resource-size" => commands::resource_size(p),
        "lattice-sweep" => commands::lattice_sweep(p),
        "region" => commands::region(p),
        "phase-diagram" => commands::phase_diagram(p),
        "memory-effect" => commands::memory(p),
        _ => unreachable!("clap only yields known subcommands"),
    }
}

/// Settings that were given, by key.
fn config_echo(p: &Params) -> serde_json::Value {
    let mut v = serde_json::to_value(p).expect("params serialize");
    if let Some(m) = v.as_object_mut() {
        m.retain(|_, x| !x.is_null());
    }
    v
}

/// Resolves the configuration, runs the subcommand and writes outputs.
pub fn run(cmd: &Command) -> Result<bool, CliError> {
    let name = cmd.name();
    let params = config::resolve(name, cmd.params())?;
    let start = Instant::now();
    let result = dispatch(name, &params);
    let mut meta = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": params.seed.unwrap_or(0),
        "workers": params.workers,
        "config": config_echo(&params),
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    let out = params.out.as_deref();
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            meta["status"] = json!(if outcome.passed { "ok" } else { "checks failed" });
            meta["extra"] = outcome.extra;
            match (out, &outcome.csv) {
                (Some(path), Some(csv)) => {
                    std::fs::write(path, csv).map_err(|e| {
                        CliError::Runtime(format!("cannot write {}: {e}", path.display()))
                    })?;
                    output::write_json(&output::sidecar_path(path), &meta)?;
                }
                (Some(path), None) => output::write_json(&output::sidecar_path(path), &meta)?,
                (None, Some(csv)) => print!("{csv}"),
                (None, None) => {}
            }
            Ok(outcome.passed)
        }
        Err(e) => {
            if let Some(path) = out {
                // no table is written; the sidecar records the failure
                meta["status"] = json!("failed");
                meta["error"] = json!(e.to_string());
                let _ = output::write_json(&output::sidecar_path(path), &meta);
            }
            Err(e)
        }
    }
}

/// Entry point shared by the binary and the tests. Exit codes: 0 on
/// success, 1 on runtime failure or failed checks, 2 on configuration
/// errors.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("herald-tpc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
