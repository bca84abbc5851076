use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use aloha_core::{replication_stream, Boundary, NetworkConfig, PointSet};
use aloha_sim::export::write_points;
use aloha_sim::formulas::closed_forms;
use aloha_sim::{parse_config, run_experiment, RunOptions};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

/// Slotted-ALOHA connectivity experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    ///
    /// Required keys: kind, lambda, p, beta, eta (`inf` allowed).
    /// Defaults: window_half = 50, replications = 200, seed = 0,
    /// max_slots = 10000, output = "out", boundary = torus for degrees,
    /// nn_time and opportunistic_time, window otherwise;
    /// distances = [5, 10, ..., 45]; giant_only = true for delay kinds with
    /// finite eta; min_distance = 5 * eta. time_constant_vs_p sweeps
    /// p = 0.05, 0.10, ..., 0.50 when no [sweep] table is given.
    Run {
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory (default: the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare results with the closed forms; exit nonzero on a 3-SE violation.
        #[arg(long)]
        verify: bool,
    },
    /// Print the closed forms as JSON.
    Formulas {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        beta: f64,
        /// Guard range; `inf` for the interference-limited regime.
        #[arg(long)]
        eta: f64,
    },
    /// Sample one point set and print it as `index,x,y`.
    Points {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 50.0)]
        window_half: f64,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Window)]
        boundary: BoundaryArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Window,
    Torus,
}

fn run() -> Result<bool> {
    match Cli::parse().command {
        Command::Run { config, seed, jobs, out, verify } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let spec = parse_config(&text).with_context(|| format!("{}", config.display()))?;
            if jobs == Some(0) {
                bail!("--jobs must be at least 1");
            }
            let report = run_experiment(&spec, &RunOptions { seed, jobs, out_dir: out, verify })?;
            eprintln!("{} runs in {:.1}s -> {}", report.planned_runs, report.wall_seconds, report.out_dir.display());
            for c in &report.checks {
                println!(
                    "{} {} [{}] observed {} expected {} se {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.sweep_value,
                    c.observed,
                    c.expected,
                    c.std_error
                );
            }
            Ok(report.verified())
        }
        Command::Formulas { lambda, p, beta, eta } => {
            let v = closed_forms(lambda, p, beta, eta)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(true)
        }
        Command::Points { lambda, window_half, boundary, seed } => {
            let config = NetworkConfig {
                lambda,
                window_half,
                boundary: match boundary {
                    BoundaryArg::Window => Boundary::Window,
                    BoundaryArg::Torus => Boundary::Torus,
                },
                seed,
                ..NetworkConfig::default()
            };
            let ps = PointSet::sample(&config, &mut replication_stream(seed, 0, 0))?;
            write_points(std::io::stdout().lock(), &ps)?.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
