//! Stability of weighted-norm moments.
//!
//! The tracked functional is the `p`-th power of the exponentially weighted
//! sup norm, `(sup_{t <= T} max_j |u| e^{-lambda |x_j|})^p`, averaged over
//! seeds. For data and solutions growing no faster than `e^{lambda |x|}`
//! this is the natural moment: it must be stable both under parabolic grid
//! refinement and under widening the spatial domain. The unweighted
//! (`lambda = 0`) control is computed from the very same trajectories and
//! must grow with the domain, showing the weight is what earns stability.

use std::path::Path;

use serde::Serialize;
use she_core::{build_lattice, ctem_profile, simulate, Coefficient, Lattice, SolverConfig};

use crate::config::{coefficient, initial_field, ExperimentConfig};
use crate::report::{Report, Series, Verdict};
use crate::CliResult;

#[derive(Debug, Serialize)]
struct VariantMoment {
    name: String,
    half_width: f64,
    dx: f64,
    dt: f64,
    weighted_mean: f64,
    weighted_stderr: f64,
    unweighted_mean: f64,
}

struct VariantOutcome {
    stats: VariantMoment,
    profile_means: Vec<f64>,
}

const PROFILE_LAMBDAS: [f64; 9] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];

fn run_variant(
    name: &str,
    lat: &Lattice,
    cfg: &ExperimentConfig,
    sigma: &Coefficient,
    drift: &Coefficient,
    out_dir: &Path,
    dump: bool,
) -> CliResult<VariantOutcome> {
    let section = &cfg.moments;
    let u0 = initial_field(&cfg.coefficients.u0, lat)?;
    let mut solver_cfg = SolverConfig::new(lat.clone());
    solver_cfg.record_every = ((section.record_spacing / lat.dt()).round() as usize).max(1);
    solver_cfg.clamp_threshold = cfg.run.clamp_threshold;
    solver_cfg.u0_label = Some(cfg.coefficients.u0.clone());

    let mut weighted = Vec::with_capacity(cfg.run.seeds as usize);
    let mut unweighted = Vec::with_capacity(cfg.run.seeds as usize);
    let mut profile_sums = vec![0.0f64; PROFILE_LAMBDAS.len()];
    for seed in super::seed_range(cfg) {
        let noise = she_core::sample_noise(lat, seed);
        let traj = simulate(&solver_cfg, &u0, sigma, drift, &noise)?;
        let rows = ctem_profile(&traj, &[section.lambda, 0.0])?;
        weighted.push(rows[0].sup_weighted_norm.powf(section.p));
        unweighted.push(rows[1].sup_weighted_norm.powf(section.p));
        for (acc, row) in profile_sums.iter_mut().zip(ctem_profile(&traj, &PROFILE_LAMBDAS)?) {
            *acc += row.sup_weighted_norm.powf(section.p);
        }
        if dump {
            super::maybe_dump(cfg, out_dir, "moments", seed, &traj)?;
        }
    }
    let n = cfg.run.seeds.max(1) as f64;
    let (w_mean, w_se) = super::mean_stderr(&weighted);
    let (u_mean, _) = super::mean_stderr(&unweighted);
    Ok(VariantOutcome {
        stats: VariantMoment {
            name: name.into(),
            half_width: lat.half_width(),
            dx: lat.dx(),
            dt: lat.dt(),
            weighted_mean: w_mean,
            weighted_stderr: w_se,
            unweighted_mean: u_mean,
        },
        profile_means: profile_sums.iter().map(|s| s / n).collect(),
    })
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<Report> {
    let lat = cfg.lattice()?;
    let section = &cfg.moments;
    let sigma = coefficient(&cfg.coefficients.sigma)?;
    let drift = coefficient(&cfg.coefficients.drift)?;

    let base = run_variant("base", &lat, cfg, &sigma, &drift, out_dir, true)?;
    let mut variants = Vec::new();
    let mut verdicts = Vec::new();
    let mut series = vec![Series {
        name: "base_weighted_moment_by_lambda".into(),
        x: PROFILE_LAMBDAS.to_vec(),
        y: base.profile_means.clone(),
    }];

    if section.refine {
        let fine = build_lattice(lat.half_width(), lat.dx() / 2.0, lat.dt() / 4.0, lat.horizon(), lat.boundary())?;
        let refined = run_variant("refined", &fine, cfg, &sigma, &drift, out_dir, false)?;
        let rel = (refined.stats.weighted_mean - base.stats.weighted_mean).abs()
            / base.stats.weighted_mean.abs().max(f64::MIN_POSITIVE);
        verdicts.push(Verdict::new(
            "refined_moment_stable",
            rel <= section.tolerance_rel,
            format!(
                "weighted moment {:.4} (base) vs {:.4} (dx/2, dt/4): relative shift {:.2}%, allowed {:.0}%",
                base.stats.weighted_mean,
                refined.stats.weighted_mean,
                100.0 * rel,
                100.0 * section.tolerance_rel
            ),
        ));
        variants.push(refined.stats);
    }

    if section.widen {
        let wide = build_lattice(2.0 * lat.half_width(), lat.dx(), lat.dt(), lat.horizon(), lat.boundary())?;
        let widened = run_variant("widened", &wide, cfg, &sigma, &drift, out_dir, false)?;
        let rel = (widened.stats.weighted_mean - base.stats.weighted_mean).abs()
            / base.stats.weighted_mean.abs().max(f64::MIN_POSITIVE);
        verdicts.push(Verdict::new(
            "widened_moment_stable",
            rel <= section.tolerance_rel,
            format!(
                "weighted moment {:.4} (half-width {}) vs {:.4} (half-width {}): relative shift {:.2}%, allowed {:.0}%",
                base.stats.weighted_mean,
                lat.half_width(),
                widened.stats.weighted_mean,
                2.0 * lat.half_width(),
                100.0 * rel,
                100.0 * section.tolerance_rel
            ),
        ));
        if section.unweighted_control {
            let growth = widened.stats.unweighted_mean / base.stats.unweighted_mean.max(f64::MIN_POSITIVE);
            verdicts.push(Verdict::new(
                "unweighted_control_grows",
                growth >= section.control_growth_min,
                format!(
                    "unweighted moment grows {growth:.2}x when the domain doubles, required at least {:.2}x",
                    section.control_growth_min
                ),
            ));
        }
        series.push(Series {
            name: "widened_weighted_moment_by_lambda".into(),
            x: PROFILE_LAMBDAS.to_vec(),
            y: widened.profile_means.clone(),
        });
        variants.push(widened.stats);
    }
    variants.insert(0, base.stats);

    #[derive(Serialize)]
    struct Results {
        sigma: String,
        drift: String,
        u0: String,
        lambda: f64,
        p: f64,
        variants: Vec<VariantMoment>,
    }

    let mut report = Report::new("moments", cfg.run.seed_offset, cfg.run.seeds);
    report.set_results(&Results {
        sigma: cfg.coefficients.sigma.clone(),
        drift: cfg.coefficients.drift.clone(),
        u0: cfg.coefficients.u0.clone(),
        lambda: section.lambda,
        p: section.p,
        variants,
    })?;
    report.series = series;
    report.verdicts = verdicts;
    Ok(report)
}
