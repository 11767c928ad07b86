//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for validation or comparison-domain errors,
//! 2 for I/O or usage errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::compare::{self, PolarityTable};
use crate::report;
use crate::scenario::{self, Scenario, ScenarioError};
use crate::sim::{self, RunOutput};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_IO: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "wapsim", version, about = "Cellular handoff simulator with 802.11 access-point assist")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario arm and write stats.csv and events.json.
    Run {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario duration, in seconds.
        #[arg(long)]
        duration: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run both arms (WAPs enabled and disabled) and classify the
    /// differences; writes per-arm stats, comparison.csv, and report.txt.
    Compare {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario duration, in seconds.
        #[arg(long)]
        duration: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Relative significance threshold for classification.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Parse and validate a scenario file.
    Validate {
        /// Scenario JSON file.
        scenario: PathBuf,
    },
    /// Replay bundled fixtures.
    Fixtures {
        /// Classify the published with/without readings and print the
        /// resulting report.
        #[arg(long)]
        paper_table: bool,
        /// Relative significance threshold for classification.
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    std::process::ExitCode::from(dispatch(cli))
}

fn dispatch(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Run { scenario, seed, duration, out } => cmd_run(&scenario, seed, duration, &out),
        Command::Compare { scenario, seed, duration, out, epsilon } => {
            cmd_compare(&scenario, seed, duration, &out, epsilon)
        }
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Fixtures { paper_table, epsilon } => cmd_fixtures(paper_table, epsilon),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

fn domain(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_DOMAIN, message: message.into() }
}

fn io(message: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_IO, message: message.to_string() }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> CliError {
        let code = match e {
            ScenarioError::Io(_) => EXIT_IO,
            ScenarioError::Parse(_) | ScenarioError::Validation { .. } => EXIT_DOMAIN,
        };
        CliError { code, message: e.to_string() }
    }
}

fn load(path: &Path, seed: Option<u64>, duration: Option<u64>) -> Result<Scenario, CliError> {
    let mut scenario = scenario::load_scenario(path)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(secs) = duration {
        scenario.duration_ms = secs
            .checked_mul(1_000)
            .ok_or_else(|| domain("duration overflows"))?;
    }
    Ok(scenario)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| io(format!("cannot write {}: {e}", path.display())))
}

fn cmd_run(path: &Path, seed: Option<u64>, duration: Option<u64>, out: &Path) -> Result<(), CliError> {
    let scenario = load(path, seed, duration)?;
    let run = sim::run(&scenario);
    write_file(out, "stats.csv", &report::stats_csv(&run))?;
    write_file(out, "events.json", &report::events_json(&run))?;
    println!(
        "ran '{}' for {} ms (seed {}, WAPs {}): {} handoff events, {} drop(s)",
        run.scenario_name,
        run.duration_ms,
        run.seed,
        if run.wap_enabled { "on" } else { "off" },
        run.handoff_events.len(),
        run.drops
    );
    println!("wrote {} and {}", out.join("stats.csv").display(), out.join("events.json").display());
    Ok(())
}

/// Runs the two arms of a comparison concurrently; they share no state.
pub fn run_both_arms(scenario: &Scenario) -> (RunOutput, RunOutput) {
    let mut without = scenario.clone();
    without.wap_enabled = false;
    let mut with_wap = scenario.clone();
    with_wap.wap_enabled = true;
    std::thread::scope(|s| {
        let ha = s.spawn(|| sim::run(&without));
        let hb = s.spawn(|| sim::run(&with_wap));
        (ha.join().expect("run completes"), hb.join().expect("run completes"))
    })
}

fn cmd_compare(
    path: &Path,
    seed: Option<u64>,
    duration: Option<u64>,
    out: &Path,
    epsilon: Option<f64>,
) -> Result<(), CliError> {
    let scenario = load(path, seed, duration)?;
    let table = PolarityTable::bundled();
    let epsilon = epsilon.unwrap_or(table.epsilon);
    if epsilon < 0.0 || epsilon.is_nan() {
        return Err(domain(format!("epsilon must be >= 0 (got {epsilon})")));
    }
    let (without, with_wap) = run_both_arms(&scenario);
    let comparison = compare::compare(&without, &with_wap, &table, epsilon)
        .map_err(|e| domain(e.to_string()))?;
    write_file(out, "stats_without_wap.csv", &report::stats_csv(&without))?;
    write_file(out, "stats_with_wap.csv", &report::stats_csv(&with_wap))?;
    write_file(out, "events_without_wap.json", &report::events_json(&without))?;
    write_file(out, "events_with_wap.json", &report::events_json(&with_wap))?;
    write_file(out, "comparison.csv", &report::comparison_csv(&comparison))?;
    let text = report::report_txt(&comparison);
    write_file(out, "report.txt", &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let scenario = scenario::load_scenario(path)?;
    println!(
        "OK: '{}' with {} nodes, fingerprint {}",
        scenario.name,
        scenario.nodes.len(),
        scenario.fingerprint()
    );
    Ok(())
}

fn cmd_fixtures(paper_table: bool, epsilon: Option<f64>) -> Result<(), CliError> {
    if !paper_table {
        return Err(domain("nothing selected; pass --paper-table"));
    }
    let table = PolarityTable::bundled();
    let epsilon = epsilon.unwrap_or(table.epsilon);
    let report = compare::paper_fixture_report(&table, epsilon);
    print!("{}", report::report_txt(&report));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn duration_override_is_seconds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        std::fs::write(&path, crate::scenario::CANONICAL_SCENARIO_JSON).unwrap();
        let s = load(&path, Some(7), Some(2)).unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.duration_ms, 2_000);
    }

    #[test]
    fn both_arms_share_fingerprint() {
        let mut s = crate::scenario::Scenario::canonical();
        s.duration_ms = 0;
        let (a, b) = run_both_arms(&s);
        assert!(!a.wap_enabled && b.wap_enabled);
        assert_eq!(a.fingerprint, b.fingerprint);
    }
}
