//! `she-lab`: run a stochastic-heat-equation experiment or plot a report.
//!
//! Exit codes: 0 all verdicts pass, 2 at least one verdict fails,
//! 3 configuration problem, 4 numerical or io failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use she_cli::{config, experiments, plot, report, CliError};

#[derive(Parser)]
#[command(name = "she-lab", version, about = "Simulation and verification lab for the stochastic heat equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the number of seeds in the config.
    #[arg(long)]
    seeds: Option<u64>,
    /// Output directory (default: $OUTPUT_DIR, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Coupled solutions under ordered drifts stay ordered.
    Comparison(RunArgs),
    /// Monotone mollified-drift ladder converges.
    #[command(name = "uniqueness_ladder", alias = "uniqueness-ladder")]
    UniquenessLadder(RunArgs),
    /// Weighted-norm moments are stable under refinement and widening.
    Moments(RunArgs),
    /// Pathwise Holder exponents along both axes.
    Holder(RunArgs),
    /// Exponential-weight mean, Novikov bound, and stopping times.
    Girsanov(RunArgs),
    /// Heat-kernel bound sweeps.
    #[command(name = "kernel_audit", alias = "kernel-audit")]
    KernelAudit(RunArgs),
    /// Render a report's series block to SVG.
    Plot {
        /// Path to a report JSON produced by an experiment run.
        #[arg(long)]
        report: PathBuf,
    },
}

fn out_dir(args: &RunArgs) -> PathBuf {
    if let Some(dir) = &args.out {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var("OUTPUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("out")
}

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Config(_) => 3,
        CliError::Numerics(_) | CliError::Io(_) => 4,
    }
}

fn run_experiment(name: &str, args: &RunArgs) -> Result<bool, CliError> {
    let mut cfg = config::load_config(&args.config)?;
    if let Some(seeds) = args.seeds {
        cfg.run.seeds = seeds;
    }
    let dir = out_dir(args);

    let started = Instant::now();
    let rep = experiments::run(name, &cfg, &dir)?;
    let wall_ms = started.elapsed().as_millis();

    let path = report::write_report(&dir, &rep)?;
    report::write_timing(&dir, name, wall_ms)?;

    for v in &rep.verdicts {
        println!("verdict {name}/{}: {} — {}", v.name, if v.pass { "pass" } else { "FAIL" }, v.detail);
    }
    println!("report written to {} ({wall_ms} ms)", path.display());
    Ok(rep.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Comparison(a) => run_experiment("comparison", a),
        Command::UniquenessLadder(a) => run_experiment("uniqueness_ladder", a),
        Command::Moments(a) => run_experiment("moments", a),
        Command::Holder(a) => run_experiment("holder", a),
        Command::Girsanov(a) => run_experiment("girsanov", a),
        Command::KernelAudit(a) => run_experiment("kernel_audit", a),
        Command::Plot { report } => match plot::render_report(report) {
            Ok(path) => {
                println!("plot written to {}", path.display());
                Ok(true)
            }
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("she-lab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
