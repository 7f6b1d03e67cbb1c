//! Deterministic JSON reports.
//!
//! Reports contain no clocks, hostnames, or paths: running the same config
//! twice produces byte-identical files. Wall-clock timing goes to a
//! separate sidecar so it never perturbs the report bytes.

use std::path::{Path, PathBuf};

use serde::Serialize;
use she_core::{RNG_ID, SCHEME_VERSION};

use crate::{CliError, CliResult};

pub const REPORT_SCHEMA_VERSION: &str = "she-lab-report/1";

/// One named check with its outcome.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Self { name: name.into(), pass, detail }
    }
}

/// A plottable curve embedded in a report.
#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub experiment: String,
    pub scheme_version: &'static str,
    pub rng_id: &'static str,
    /// Seed range actually used: `seed_offset .. seed_offset + seeds`.
    pub seed_offset: u64,
    pub seeds: u64,
    /// Experiment-specific payload with a fixed field order.
    pub results: serde_json::Value,
    pub series: Vec<Series>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(experiment: &str, seed_offset: u64, seeds: u64) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment: experiment.into(),
            scheme_version: SCHEME_VERSION,
            rng_id: RNG_ID,
            seed_offset,
            seeds,
            results: serde_json::Value::Null,
            series: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn set_results<T: Serialize>(&mut self, results: &T) -> CliResult<()> {
        self.results = serde_json::to_value(results)
            .map_err(|e| CliError::Io(format!("cannot serialize results: {e}")))?;
        Ok(())
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Writes `<out_dir>/<experiment>_report.json` and returns its path.
pub fn write_report(out_dir: &Path, report: &Report) -> CliResult<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{}_report.json", report.experiment));
    let mut bytes = serde_json::to_vec_pretty(report)
        .map_err(|e| CliError::Io(format!("cannot serialize report: {e}")))?;
    bytes.push(b'\n');
    std::fs::write(&path, bytes)?;
    Ok(path)
}

/// Writes the wall-clock sidecar `<out_dir>/<experiment>_timing.json`.
pub fn write_timing(out_dir: &Path, experiment: &str, wall_ms: u128) -> CliResult<PathBuf> {
    #[derive(Serialize)]
    struct Timing<'a> {
        experiment: &'a str,
        wall_ms: u128,
    }
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{experiment}_timing.json"));
    let mut bytes = serde_json::to_vec_pretty(&Timing { experiment, wall_ms })
        .map_err(|e| CliError::Io(format!("cannot serialize timing: {e}")))?;
    bytes.push(b'\n');
    std::fs::write(&path, bytes)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_bytes_are_stable() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new("demo", 0, 3);
        r.set_results(&serde_json::json!({"a": 1.5, "b": [1, 2]})).unwrap();
        r.series.push(Series { name: "s".into(), x: vec![0.0, 1.0], y: vec![2.0, 3.0] });
        r.verdicts.push(Verdict::new("check", true, "ok".into()));

        let p1 = write_report(dir.path(), &r).unwrap();
        let b1 = std::fs::read(&p1).unwrap();
        let p2 = write_report(dir.path(), &r).unwrap();
        let b2 = std::fs::read(&p2).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(b1, b2);
        assert!(String::from_utf8(b1).unwrap().contains("she-lab-report/1"));
    }
}
