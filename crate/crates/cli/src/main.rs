//! `wpcn`: solve instances, run sweeps, verify invariants and plot summaries.

mod plot;
mod run_config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wpcn_core::allocator::solve;
use wpcn_core::channel::generate_scenario;
use wpcn_core::simulator::{read_csv, run_sweep, summarize, write_csv, write_trials_csv, SweepSpec};
use wpcn_core::verify::{run_suite, Check, Suite, KKT_TOL};
use wpcn_core::{Result, WpcnError};

use run_config::{env_seed, read_json, RunConfig};

const SMOKE_CONFIG: &str = include_str!("../configs/smoke.json");

#[derive(Debug, Parser)]
#[command(name = "wpcn", version, about = "Robust resource allocation for MIMO wireless-powered networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one generated instance and print the report as JSON.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Override a config value, e.g. `--set csi.sigma_est2=0`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a Monte-Carlo sweep and write summary.csv and trials.csv.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run oracle and invariant suites; exits 1 if any check fails.
    Verify {
        /// Run one suite: waterfill, worst_case, kkt or s_procedure.
        #[arg(long)]
        suite: Option<String>,
        /// Scenario for the KKT suite; defaults to the bundled smoke config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Pass threshold for relative optimality residuals.
        #[arg(long, default_value_t = KKT_TOL)]
        kkt_tol: f64,
    },
    /// Render one metric of a summary CSV as an SVG line chart.
    Plot {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Outcome {
    Ok,
    VerificationFailed,
}

/// Prints a line, tolerating a closed pipe such as `wpcn solve ... | head`.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| WpcnError::Io { path: path.to_path_buf(), source })
}

fn cmd_solve(config: &Path, overrides: &[String]) -> Result<Outcome> {
    let run = RunConfig::load(config, overrides)?;
    let scn = generate_scenario(&run.scenario, run.seed)?;
    let report = solve(&scn, &run.solver)?;
    say(&serde_json::to_string_pretty(&report)?);
    Ok(Outcome::Ok)
}

fn cmd_sweep(spec: &Path, out: &Path, threads: Option<usize>) -> Result<Outcome> {
    let mut value = read_json(spec)?;
    if let (Some(seed), Some(obj)) = (env_seed()?, value.as_object_mut()) {
        obj.insert("seed".into(), seed.into());
    }
    let spec = SweepSpec::from_json(&value.to_string())?;
    if threads == Some(0) {
        return Err(WpcnError::Config("--threads must be >= 1".into()));
    }
    std::fs::create_dir_all(out).map_err(|source| WpcnError::Io { path: out.to_path_buf(), source })?;
    let table = run_sweep(&spec, threads)?;
    let summary_path = out.join("summary.csv");
    write_csv(&summarize(&table)?, &summary_path)?;
    write_trials_csv(&table, &out.join("trials.csv"))?;
    eprintln!("wrote {} ({} trial rows)", summary_path.display(), table.rows.len());
    Ok(Outcome::Ok)
}

fn cmd_verify(suite: Option<&str>, config: Option<&Path>, overrides: &[String], kkt_tol: f64) -> Result<Outcome> {
    if !(kkt_tol >= 0.0) {
        return Err(WpcnError::Config("--kkt-tol must be >= 0".into()));
    }
    let suites = match suite {
        Some(name) => vec![name.parse::<Suite>()?],
        None => Suite::ALL.to_vec(),
    };
    let root = match config {
        Some(p) => read_json(p)?,
        None => serde_json::from_str(SMOKE_CONFIG)?,
    };
    let run = RunConfig::from_value(root, env_seed()?, overrides)?;
    let mut failed: Vec<Check> = Vec::new();
    for s in suites {
        for check in run_suite(s, &run.scenario, &run.solver, run.seed, kkt_tol)? {
            say(&format!("[{s}] {check}"));
            if !check.passed {
                failed.push(check);
            }
        }
    }
    if failed.is_empty() {
        say("all checks passed");
        Ok(Outcome::Ok)
    } else {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        eprintln!("failed invariants: {}", names.join(", "));
        Ok(Outcome::VerificationFailed)
    }
}

fn cmd_plot(summary: &Path, metric: &str, out: &Path) -> Result<Outcome> {
    let rows = read_csv(summary)?;
    let series = plot::series_for(&rows, metric)?;
    let x_label = rows.first().map(|r| r.sweep_var.as_str()).unwrap_or("value");
    write_file(out, &plot::render_svg(&series, x_label, metric))?;
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { config, overrides } => cmd_solve(config, overrides),
        Command::Sweep { spec, out, threads } => cmd_sweep(spec, out, *threads),
        Command::Verify { suite, config, overrides, kkt_tol } => {
            cmd_verify(suite.as_deref(), config.as_deref(), overrides, *kkt_tol)
        }
        Command::Plot { summary, metric, out } => cmd_plot(summary, metric, out),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
