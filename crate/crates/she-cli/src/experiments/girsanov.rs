//! Exponential-weight sanity for a constant tilt.
//!
//! A constant `Z` makes every ingredient checkable in closed form: the
//! quadratic-variation clock is deterministic (`c^2 2L t`), the terminal
//! log-weight is Gaussian, and `E[L_T] = 1` up to an `O(dx)` boundary
//! half-cell bias far below Monte-Carlo resolution. The ensemble mean test,
//! the Novikov bound, and the threshold clock's stopping times are all
//! exercised here.

use std::path::Path;

use serde::Serialize;
use she_core::{log_weight, mean_weight_test, novikov_estimate, stopping_time, GirsanovWeight, ZField};

use crate::config::ExperimentConfig;
use crate::report::{Report, Series, Verdict};
use crate::{CliError, CliResult};

#[derive(Debug, Serialize)]
struct ThresholdStats {
    threshold: f64,
    mean_stopping_time: f64,
    crossed_fraction: f64,
}

pub fn run(cfg: &ExperimentConfig, _out_dir: &Path) -> CliResult<Report> {
    let lat = cfg.lattice()?;
    let section = &cfg.girsanov;
    if section.thresholds.is_empty() {
        return Err(CliError::Config("girsanov needs at least one stopping threshold".into()));
    }
    if !section.thresholds.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::Config("stopping thresholds must be strictly increasing".into()));
    }
    let z = ZField::constant(lat.clone(), section.z_constant)?;

    let n_thresholds = section.thresholds.len();
    let mut weights: Vec<GirsanovWeight> = Vec::with_capacity(cfg.run.seeds as usize);
    let mut stop_sums = vec![0.0f64; n_thresholds];
    let mut stop_crossed = vec![0usize; n_thresholds];
    let mut monotone_ok = true;
    let mut running_mean_x = Vec::new();
    let mut running_mean_y = Vec::new();
    let mut running_sum = 0.0f64;

    for (ordinal, seed) in super::seed_range(cfg).enumerate() {
        let noise = she_core::sample_noise(&lat, seed);
        let w = log_weight(&z, &noise)?;

        let mut prev_time = 0.0;
        for (i, &k) in section.thresholds.iter().enumerate() {
            let st = stopping_time(&w.times, &w.quad_var, &w.quad_var, k)?;
            stop_sums[i] += st.time;
            stop_crossed[i] += st.crossed as usize;
            if st.time < prev_time {
                monotone_ok = false;
            }
            prev_time = st.time;
        }

        running_sum += w.terminal_log_l().exp();
        if (ordinal + 1) % 100 == 0 || ordinal + 1 == cfg.run.seeds as usize {
            running_mean_x.push((ordinal + 1) as f64);
            running_mean_y.push(running_sum / (ordinal + 1) as f64);
        }

        // Keep only the endpoints: the ensemble statistics need terminal
        // values, and full traces for every seed would be pure ballast.
        weights.push(GirsanovWeight {
            times: vec![0.0, *w.times.last().unwrap()],
            log_l: vec![0.0, w.terminal_log_l()],
            quad_var: vec![0.0, w.terminal_quad_var()],
            seed: w.seed,
        });
    }

    let mean_report = mean_weight_test(&weights)?;
    let novikov = novikov_estimate(&weights[0])?;
    let n_seeds = cfg.run.seeds.max(1) as f64;
    let thresholds: Vec<ThresholdStats> = section
        .thresholds
        .iter()
        .enumerate()
        .map(|(i, &k)| ThresholdStats {
            threshold: k,
            mean_stopping_time: stop_sums[i] / n_seeds,
            crossed_fraction: stop_crossed[i] as f64 / n_seeds,
        })
        .collect();

    let verdicts = vec![
        Verdict::new(
            "mean_weight_is_one",
            mean_report.pass,
            format!(
                "ensemble mean {:.5} +/- {:.5} over {} seeds",
                mean_report.mean, mean_report.stderr, mean_report.n
            ),
        ),
        Verdict::new(
            "weight_variance_moderate",
            !mean_report.high_variance,
            format!("mean terminal clock {:.4}", mean_report.mean_quad_var),
        ),
        Verdict::new(
            "stopping_times_monotone",
            monotone_ok,
            "threshold clock crossings ordered for every seed".into(),
        ),
        Verdict::new(
            "novikov_bound_finite",
            novikov.is_finite() && novikov >= 1.0,
            format!("novikov estimate {novikov:.4}"),
        ),
    ];

    #[derive(Serialize)]
    struct Results {
        z_constant: f64,
        mean: f64,
        stderr: f64,
        mean_quad_var: f64,
        novikov_estimate: f64,
        thresholds: Vec<ThresholdStats>,
    }

    let mut report = Report::new("girsanov", cfg.run.seed_offset, cfg.run.seeds);
    report.set_results(&Results {
        z_constant: section.z_constant,
        mean: mean_report.mean,
        stderr: mean_report.stderr,
        mean_quad_var: mean_report.mean_quad_var,
        novikov_estimate: novikov,
        thresholds,
    })?;
    report.series = vec![Series {
        name: "running_mean_weight".into(),
        x: running_mean_x,
        y: running_mean_y,
    }];
    report.verdicts = verdicts;
    Ok(report)
}
