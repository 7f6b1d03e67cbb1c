//! Pathwise Holder regularity along both grid axes.
//!
//! For non-degenerate noise the solution is rough: near exponent 1/4 in
//! time and 1/2 in space. Each seed gets a log-log regression estimate per
//! axis; the ensemble's 95% confidence interval must land inside the
//! configured acceptance window, and every fit must carry the `rough` flag.

use std::path::Path;

use serde::Serialize;
use she_core::{holder_exponent_estimate, simulate, Axis, SolverConfig};

use crate::config::{coefficient, initial_field, ExperimentConfig};
use crate::report::{Report, Series, Verdict};
use crate::CliResult;

#[derive(Debug, Serialize)]
struct AxisSummary {
    axis: String,
    mean_exponent: f64,
    ensemble_ci_half_width: f64,
    window: [f64; 2],
    rough_fraction: f64,
    mean_fit_ci_half_width: f64,
}

fn summarize(axis: Axis, exponents: &[f64], fit_cis: &[f64], rough: usize, window: [f64; 2]) -> AxisSummary {
    let (mean, se) = super::mean_stderr(exponents);
    AxisSummary {
        axis: format!("{axis:?}").to_lowercase(),
        mean_exponent: mean,
        ensemble_ci_half_width: 1.96 * se,
        window,
        rough_fraction: rough as f64 / exponents.len().max(1) as f64,
        mean_fit_ci_half_width: fit_cis.iter().sum::<f64>() / fit_cis.len().max(1) as f64,
    }
}

fn window_verdict(name: &str, s: &AxisSummary) -> Verdict {
    let lo = s.mean_exponent - s.ensemble_ci_half_width;
    let hi = s.mean_exponent + s.ensemble_ci_half_width;
    Verdict::new(
        name,
        lo >= s.window[0] && hi <= s.window[1],
        format!(
            "ensemble exponent {:.4} +/- {:.4} against window [{}, {}]",
            s.mean_exponent, s.ensemble_ci_half_width, s.window[0], s.window[1]
        ),
    )
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<Report> {
    let lat = cfg.lattice()?;
    let sigma = coefficient(&cfg.coefficients.sigma)?;
    let drift = coefficient(&cfg.coefficients.drift)?;
    let u0 = initial_field(&cfg.coefficients.u0, &lat)?;
    let mut solver_cfg = SolverConfig::new(lat.clone());
    solver_cfg.record_every = cfg.run.record_every;
    solver_cfg.clamp_threshold = cfg.run.clamp_threshold;
    solver_cfg.u0_label = Some(cfg.coefficients.u0.clone());

    let mut time_exp = Vec::new();
    let mut time_ci = Vec::new();
    let mut time_rough = 0usize;
    let mut space_exp = Vec::new();
    let mut space_ci = Vec::new();
    let mut space_rough = 0usize;

    for seed in super::seed_range(cfg) {
        let noise = she_core::sample_noise(&lat, seed);
        let traj = simulate(&solver_cfg, &u0, &sigma, &drift, &noise)?;
        let et = holder_exponent_estimate(&traj, Axis::Time)?;
        let es = holder_exponent_estimate(&traj, Axis::Space)?;
        time_exp.push(et.exponent);
        time_ci.push(et.ci_half_width);
        time_rough += et.rough as usize;
        space_exp.push(es.exponent);
        space_ci.push(es.ci_half_width);
        space_rough += es.rough as usize;
        super::maybe_dump(cfg, out_dir, "holder", seed, &traj)?;
    }

    let time = summarize(Axis::Time, &time_exp, &time_ci, time_rough, cfg.holder.time_window);
    let space = summarize(Axis::Space, &space_exp, &space_ci, space_rough, cfg.holder.space_window);

    let verdicts = vec![
        window_verdict("time_exponent_in_window", &time),
        window_verdict("space_exponent_in_window", &space),
        Verdict::new(
            "all_paths_flagged_rough",
            time.rough_fraction == 1.0 && space.rough_fraction == 1.0,
            format!(
                "rough fractions: time {:.2}, space {:.2}",
                time.rough_fraction, space.rough_fraction
            ),
        ),
    ];

    #[derive(Serialize)]
    struct Results {
        sigma: String,
        drift: String,
        u0: String,
        time: AxisSummary,
        space: AxisSummary,
    }

    let seeds_axis: Vec<f64> = (0..time_exp.len()).map(|i| i as f64).collect();
    let mut report = Report::new("holder", cfg.run.seed_offset, cfg.run.seeds);
    report.set_results(&Results {
        sigma: cfg.coefficients.sigma.clone(),
        drift: cfg.coefficients.drift.clone(),
        u0: cfg.coefficients.u0.clone(),
        time,
        space,
    })?;
    report.series = vec![
        Series { name: "time_exponent_by_seed".into(), x: seeds_axis.clone(), y: time_exp },
        Series { name: "space_exponent_by_seed".into(), x: seeds_axis, y: space_exp },
    ];
    report.verdicts = verdicts;
    Ok(report)
}
