//! The six experiments behind `she-lab`.
//!
//! Each experiment takes a parsed config and an output directory, runs its
//! seed ensemble, and returns a [`Report`](crate::report::Report); the
//! caller writes the report and decides the exit code from the verdicts.

use std::path::Path;

use she_core::{sample_noise, NoiseSheet, Trajectory};

use crate::config::ExperimentConfig;
use crate::report::Report;
use crate::{CliError, CliResult};

pub mod comparison;
pub mod girsanov;
pub mod holder;
pub mod kernel_audit;
pub mod moments;
pub mod uniqueness_ladder;

pub const EXPERIMENT_NAMES: [&str; 6] =
    ["comparison", "uniqueness_ladder", "moments", "holder", "girsanov", "kernel_audit"];

pub fn run(name: &str, cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<Report> {
    match name {
        "comparison" => comparison::run(cfg, out_dir),
        "uniqueness_ladder" => uniqueness_ladder::run(cfg, out_dir),
        "moments" => moments::run(cfg, out_dir),
        "holder" => holder::run(cfg, out_dir),
        "girsanov" => girsanov::run(cfg, out_dir),
        "kernel_audit" => kernel_audit::run(cfg, out_dir),
        other => Err(CliError::Config(format!(
            "unknown experiment {other:?}; expected one of {EXPERIMENT_NAMES:?}"
        ))),
    }
}

/// Seeds actually used by an ensemble run.
pub fn seed_range(cfg: &ExperimentConfig) -> impl Iterator<Item = u64> {
    let lo = cfg.run.seed_offset;
    lo..lo + cfg.run.seeds
}

/// Writes the first seed's artifacts next to the report when dumping is
/// enabled in the config.
pub fn maybe_dump(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    experiment: &str,
    seed: u64,
    traj: &Trajectory,
) -> CliResult<()> {
    if seed != cfg.run.seed_offset {
        return Ok(());
    }
    if cfg.dump.trajectories {
        let base = out_dir.join(format!("{experiment}_seed{seed}"));
        match cfg.dump.format.as_str() {
            "csv" => crate::io::write_trajectory_csv(&base.with_extension("csv"), traj)?,
            "binary" => crate::io::write_trajectory_binary(&base.with_extension("bin"), traj)?,
            other => {
                return Err(CliError::Config(format!(
                    "unknown dump format {other:?}; expected \"csv\" or \"binary\""
                )))
            }
        }
    }
    if cfg.dump.noise {
        let sheet: NoiseSheet = sample_noise(traj.lattice(), seed);
        crate::io::write_noise_csv(&out_dir.join(format!("{experiment}_seed{seed}_noise.csv")), &sheet)?;
    }
    Ok(())
}

/// Sample mean and standard error.
pub(crate) fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
