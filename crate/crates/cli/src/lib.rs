//! Scenario runner for the `psido` command: configuration, execution and
//! emission of verification reports.

pub mod config;
pub mod emit;
pub mod scenarios;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{ConfigError, ResolvedConfig, Scenario, ScenarioConfig};
use crate::scenarios::{run_scenario, Outcome, RunError, RunOptions};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "psido", version, about = "Verification scenarios for matrix-valued pseudodifferential calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and emit its report.
    Run {
        scenario: String,
        /// JSON config (schema_version 1); missing fields take the scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for report.json, summary.csv and plots/.
        /// Without it (and without output_path in the config) the report is
        /// printed to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write plot data as CSV.
        #[arg(long)]
        emit_plots: bool,
        /// Cross-check against the brute-force quadratures.
        #[arg(long)]
        oracle: bool,
    },
    /// List the scenarios.
    List,
}

/// Resolves and runs a scenario given a parsed config document.
pub fn execute(scenario: Scenario, config: &ScenarioConfig, opts: RunOptions) -> Result<Outcome, CliError> {
    let resolved = ResolvedConfig::resolve(scenario, config)?;
    Ok(run_scenario(&resolved, opts)?)
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("{0:#}")]
    Emit(#[from] anyhow::Error),
}

/// Exit code for a finished run.
pub fn exit_code(outcome: &Outcome) -> i32 {
    if outcome.convergence_failure {
        EXIT_CONVERGENCE
    } else if outcome.report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.command {
        Command::List => {
            for sc in Scenario::ALL {
                println!("{:<24}{}", sc.name(), sc.summary());
            }
            EXIT_PASS
        }
        Command::Run {
            scenario,
            config,
            out,
            emit_plots,
            oracle,
        } => match run_command(&scenario, config, out, RunOptions { emit_plots, oracle }) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
    }
}

fn run_command(scenario: &str, config: Option<PathBuf>, out: Option<PathBuf>, opts: RunOptions) -> Result<i32, CliError> {
    let scenario: Scenario = scenario.parse()?;
    let config = match config {
        Some(path) => ScenarioConfig::load(&path)?,
        None => ScenarioConfig::new(),
    };
    let outcome = execute(scenario, &config, opts)?;
    let report = &outcome.report;
    let mut stderr = std::io::stderr().lock();
    for m in &report.metrics {
        let _ = writeln!(
            stderr,
            "{} {:<28} {:>12.4e} {}",
            if m.pass { "PASS" } else { "FAIL" },
            m.name,
            m.value,
            m.threshold.map(|t| format!("(threshold {t:.1e})")).unwrap_or_default()
        );
    }
    for d in &report.diagnostics {
        let _ = writeln!(stderr, "note: {d}");
    }
    match out.or(config.output_path) {
        Some(dir) => {
            for path in emit::emit(report, &outcome.plots, &dir)? {
                let _ = writeln!(stderr, "wrote {}", path.display());
            }
        }
        None => print!("{}", emit::report_json(report)?),
    }
    Ok(exit_code(&outcome))
}
