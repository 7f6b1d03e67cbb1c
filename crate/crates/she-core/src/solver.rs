//! Explicit Euler-Maruyama scheme and path statistics.
//!
//! One step advances every grid point by
//! ```text
//!   u'_j = u_j + dt [ (u_{j+1} - 2 u_j + u_{j-1}) / (2 dx^2) + b(t, x_j, u_j) ]
//!              + sigma(t, x_j, u_j) xi_j / dx,
//! ```
//! where `xi_j` is the noise-sheet row of this step and the out-of-range
//! neighbours follow the lattice boundary rule. The `dt <= dx^2 / 2`
//! stability bound is guaranteed by lattice construction.
//!
//! [`simulate`] is exactly a fold of [`em_step`]: both call one shared
//! stepping kernel, so driving the scheme manually reproduces a simulated
//! trajectory bit for bit. Coupled simulation steps two solutions through
//! the identical noise rows, which is what makes pathwise comparison
//! experiments meaningful.

use serde::Serialize;

use crate::coefficients::{Coefficient, MollifierLadder};
use crate::error::{Error, Result};
use crate::lattice::{Boundary, Field, Lattice};
use crate::noise::NoiseSheet;
use crate::{RNG_ID, SCHEME_VERSION};

/// Solver parameters beyond the lattice itself.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub lattice: Lattice,
    /// Hard bound on `sup |u|`; exceeding it aborts with `BlowUp`.
    pub clamp_threshold: f64,
    /// Record every this-many steps (the final time is always recorded).
    pub record_every: usize,
    /// Label of the initial condition echoed into provenance.
    pub u0_label: Option<String>,
}

impl SolverConfig {
    pub fn new(lattice: Lattice) -> Self {
        Self { lattice, clamp_threshold: 1e9, record_every: 1, u0_label: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.clamp_threshold > 0.0) {
            return Err(Error::InvalidParameter("clamp threshold must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything needed to regenerate a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub sigma_label: String,
    pub drift_label: String,
    pub u0_label: String,
    pub scheme_version: String,
    pub rng_id: String,
    /// Noise rows consumed, and an order-sensitive digest of their bits:
    /// coupled trajectories prove they shared increments by equal digests.
    pub noise_rows_consumed: usize,
    pub noise_checksum: u64,
}

/// Recorded solution path: fields at an increasing sequence of times
/// starting at 0 with the initial condition.
#[derive(Debug, Clone)]
pub struct Trajectory {
    lattice: Lattice,
    times: Vec<f64>,
    values: Vec<f64>,
    provenance: Provenance,
}

impl Trajectory {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_recorded(&self) -> usize {
        self.times.len()
    }

    /// Grid values at recorded index `k`.
    pub fn values_at(&self, k: usize) -> &[f64] {
        let n = self.lattice.n_space();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn field_at(&self, k: usize) -> Result<Field> {
        Field::new(self.lattice.clone(), self.values_at(k).to_vec())
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Largest pointwise distance over all shared recorded times.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.lattice != other.lattice || self.times != other.times {
            return Err(Error::LatticeMismatch("trajectories disagree on grid or recording times"));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.values.iter().zip(&other.values) {
            worst = worst.max((a - b).abs());
        }
        Ok(worst)
    }
}

/// Shared stepping kernel; every public entry point funnels through this.
fn step_row(
    lat: &Lattice,
    cur: &[f64],
    row: &[f64],
    sigma: &Coefficient,
    b: &Coefficient,
    t: f64,
    next: &mut [f64],
) {
    let n = lat.n_space();
    let dt = lat.dt();
    let inv_dx = 1.0 / lat.dx();
    let half_inv_dx2 = 0.5 * inv_dx * inv_dx;
    match lat.boundary() {
        Boundary::DirichletZero => {
            for j in 0..n {
                let left = if j > 0 { cur[j - 1] } else { 0.0 };
                let right = if j + 1 < n { cur[j + 1] } else { 0.0 };
                let u = cur[j];
                let x = lat.x(j);
                next[j] = u
                    + dt * ((left - 2.0 * u + right) * half_inv_dx2 + b.eval(t, x, u))
                    + sigma.eval(t, x, u) * row[j] * inv_dx;
            }
        }
        Boundary::Periodic => {
            for j in 0..n {
                let left = cur[(j + n - 1) % n];
                let right = cur[(j + 1) % n];
                let u = cur[j];
                let x = lat.x(j);
                next[j] = u
                    + dt * ((left - 2.0 * u + right) * half_inv_dx2 + b.eval(t, x, u))
                    + sigma.eval(t, x, u) * row[j] * inv_dx;
            }
        }
    }
}

/// Scans a freshly stepped row; `time_index` is the level just produced.
fn check_state(values: &[f64], clamp: f64, time_index: usize) -> Result<()> {
    let mut sup = 0.0f64;
    for &v in values {
        if !v.is_finite() {
            return Err(Error::BlowUp { time_index, sup: f64::INFINITY });
        }
        sup = sup.max(v.abs());
    }
    if sup > clamp {
        return Err(Error::BlowUp { time_index, sup });
    }
    Ok(())
}

#[inline]
fn mix_checksum(cs: u64, bits: u64) -> u64 {
    (cs ^ bits).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(23)
}

fn row_checksum(cs: u64, row: &[f64]) -> u64 {
    row.iter().fold(cs, |acc, v| mix_checksum(acc, v.to_bits()))
}

/// One explicit step from time `t` using the given noise row. Equivalent to
/// one iteration of [`simulate`] with the default clamp threshold.
pub fn em_step(u: &Field, noise_row: &[f64], sigma: &Coefficient, b: &Coefficient, t: f64) -> Result<Field> {
    let lat = u.lattice().clone();
    if noise_row.len() != lat.n_space() {
        return Err(Error::LatticeMismatch("noise row length does not match the grid"));
    }
    let mut next = vec![0.0; lat.n_space()];
    step_row(&lat, u.values(), noise_row, sigma, b, t, &mut next);
    let time_index = ((t / lat.dt()).round() as usize).saturating_add(1);
    check_state(&next, 1e9, time_index)?;
    Field::new(lat, next)
}

fn check_same_lattice(a: &Lattice, b: &Lattice, what: &'static str) -> Result<()> {
    if a != b {
        return Err(Error::LatticeMismatch(what));
    }
    Ok(())
}

/// Runs the scheme over the whole sheet, recording every `record_every`-th
/// level plus the final one.
pub fn simulate(
    cfg: &SolverConfig,
    u0: &Field,
    sigma: &Coefficient,
    b: &Coefficient,
    noise: &NoiseSheet,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_same_lattice(u0.lattice(), &cfg.lattice, "initial condition lattice differs from solver lattice")?;
    check_same_lattice(noise.lattice(), &cfg.lattice, "noise sheet lattice differs from solver lattice")?;

    let lat = cfg.lattice.clone();
    let n = lat.n_space();
    let mut cur = u0.values().to_vec();
    let mut next = vec![0.0; n];
    let mut times = vec![0.0];
    let mut values = cur.clone();
    let mut checksum = 0u64;

    for i in 0..lat.n_time() {
        let row = noise.row(i);
        checksum = row_checksum(checksum, row);
        step_row(&lat, &cur, row, sigma, b, lat.t(i), &mut next);
        check_state(&next, cfg.clamp_threshold, i + 1)?;
        std::mem::swap(&mut cur, &mut next);
        if (i + 1) % cfg.record_every == 0 || i + 1 == lat.n_time() {
            times.push(lat.t(i + 1));
            values.extend_from_slice(&cur);
        }
    }

    let provenance = Provenance {
        seed: noise.seed(),
        sigma_label: sigma.label().to_string(),
        drift_label: b.label().to_string(),
        u0_label: cfg.u0_label.clone().unwrap_or_else(|| "unlabeled".into()),
        scheme_version: SCHEME_VERSION.to_string(),
        rng_id: RNG_ID.to_string(),
        noise_rows_consumed: lat.n_time(),
        noise_checksum: checksum,
    };
    Ok(Trajectory { lattice: lat, times, values, provenance })
}

/// Steps two solutions in lockstep through the identical noise rows.
///
/// Requires `u0_lower <= u0_upper` pointwise; the drifts are expected (but
/// cannot be verified pointwise) to satisfy `b_lower <= b_upper`. Both
/// trajectories record the same times and carry equal noise checksums.
pub fn simulate_coupled(
    cfg: &SolverConfig,
    u0_lower: &Field,
    u0_upper: &Field,
    sigma: &Coefficient,
    b_lower: &Coefficient,
    b_upper: &Coefficient,
    noise: &NoiseSheet,
) -> Result<(Trajectory, Trajectory)> {
    for (index, (&lo, &hi)) in u0_lower.values().iter().zip(u0_upper.values()).enumerate() {
        if lo > hi {
            return Err(Error::InitialOrderViolation { index, lower: lo, upper: hi });
        }
    }
    let lower = simulate(cfg, u0_lower, sigma, b_lower, noise)?;
    let upper = simulate(cfg, u0_upper, sigma, b_upper, noise)?;
    debug_assert_eq!(lower.provenance.noise_checksum, upper.provenance.noise_checksum);
    Ok((lower, upper))
}

/// Pointwise ordering summary of a coupled pair.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingSummary {
    /// Largest value of `lower - upper` over all recorded points (0 if the
    /// ordering holds everywhere).
    pub worst_violation: f64,
    /// Points where `lower - upper` exceeds the tolerance.
    pub n_violations: usize,
    pub n_points: usize,
}

/// Scans a coupled pair for ordering violations beyond `tolerance`.
pub fn ordering_violations(lower: &Trajectory, upper: &Trajectory, tolerance: f64) -> Result<OrderingSummary> {
    if lower.lattice != upper.lattice || lower.times != upper.times {
        return Err(Error::LatticeMismatch("coupled trajectories disagree on grid or recording times"));
    }
    let mut worst = 0.0f64;
    let mut n_violations = 0usize;
    for (a, b) in lower.values.iter().zip(&upper.values) {
        let gap = a - b;
        worst = worst.max(gap);
        if gap > tolerance {
            n_violations += 1;
        }
    }
    Ok(OrderingSummary { worst_violation: worst, n_violations, n_points: lower.values.len() })
}

/// Simulates the same noise under the ladder drifts `b~_{n, k}` for each `n`
/// in `n_levels` (strictly increasing). Solutions inherit the ladder's
/// pointwise drift ordering, so they should rise with `n`.
pub fn ladder_solution_sequence(
    cfg: &SolverConfig,
    u0: &Field,
    sigma: &Coefficient,
    ladder: &MollifierLadder,
    noise: &NoiseSheet,
    n_levels: &[u32],
    k: u32,
) -> Result<Vec<Trajectory>> {
    if n_levels.is_empty() {
        return Err(Error::EmptyInput("ladder level list"));
    }
    if !n_levels.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("ladder levels must be strictly increasing".into()));
    }
    n_levels
        .iter()
        .map(|&n| {
            let drift = ladder.cached_coefficient(n, k)?;
            simulate(cfg, u0, sigma, &drift, noise)
        })
        .collect()
}

// ── Weak-form residual ───────────────────────────────────────────────────

/// Residual of the weak (mild) formulation against a grid test function:
/// for each recorded time `t_k`,
/// ```text
///   R_k = <u(t_k), phi> - <u(0), phi>
///         - sum_l dt_l <u(t_l), (1/2) Lap_h phi>
///         - sum_l dt_l <b(t_l, ., u(t_l)), phi>
///         - sum_l sum_j sigma(t_l, x_j, u(t_l, x_j)) phi_j Xi_{l,j},
/// ```
/// where the sums run over recorded intervals `[t_l, t_{l+1})`, `Lap_h` is
/// the discrete Laplacian under the lattice boundary rule, and `Xi_{l,j}`
/// aggregates the noise rows of the interval. With every step recorded the
/// sum telescopes against the scheme to floating-point roundoff; with
/// coarser recording the residual measures the Riemann-sum coarsening error
/// and shrinks under refinement.
///
/// The test function must be compactly supported with margin at least
/// `6 sqrt(T)` from the boundary so that no mass the scheme pushes outward
/// re-enters through `phi`.
pub fn mild_residual(
    traj: &Trajectory,
    phi: &Field,
    noise: &NoiseSheet,
    sigma: &Coefficient,
    b: &Coefficient,
) -> Result<Vec<f64>> {
    let lat = traj.lattice();
    check_same_lattice(phi.lattice(), lat, "test function lattice differs from trajectory lattice")?;
    check_same_lattice(noise.lattice(), lat, "noise sheet lattice differs from trajectory lattice")?;

    let n = lat.n_space();
    let dx = lat.dx();
    let margin_needed = 6.0 * lat.horizon().sqrt();
    let mut support_edge = 0.0f64;
    for (j, &v) in phi.values().iter().enumerate() {
        if v != 0.0 {
            support_edge = support_edge.max(lat.x(j).abs());
        }
    }
    if lat.half_width() - support_edge < margin_needed {
        return Err(Error::SupportViolation(format!(
            "test function support reaches |x| = {support_edge}, needs margin {margin_needed} from the boundary"
        )));
    }

    // Discrete Laplacian of phi under the lattice boundary rule.
    let pv = phi.values();
    let mut lap_phi = vec![0.0; n];
    for j in 0..n {
        let (left, right) = match lat.boundary() {
            Boundary::DirichletZero => (
                if j > 0 { pv[j - 1] } else { 0.0 },
                if j + 1 < n { pv[j + 1] } else { 0.0 },
            ),
            Boundary::Periodic => (pv[(j + n - 1) % n], pv[(j + 1) % n]),
        };
        lap_phi[j] = (left - 2.0 * pv[j] + right) / (dx * dx);
    }

    let ip = |f: &[f64], g: &[f64]| -> f64 {
        let mut acc = 0.0;
        for j in 0..n {
            acc += f[j] * g[j] * lat.quadrature_weight(j);
        }
        acc * dx
    };

    let base = ip(traj.values_at(0), pv);
    let mut residuals = vec![0.0];
    let mut drift_heat_acc = 0.0;
    let mut noise_acc = 0.0;
    for l in 0..traj.n_recorded() - 1 {
        let t_l = traj.times()[l];
        let dt_l = traj.times()[l + 1] - t_l;
        let u_l = traj.values_at(l);

        drift_heat_acc += dt_l * 0.5 * ip(u_l, &lap_phi);
        let b_vals: Vec<f64> = (0..n).map(|j| b.eval(t_l, lat.x(j), u_l[j])).collect();
        drift_heat_acc += dt_l * ip(&b_vals, pv);

        // Aggregate the noise rows of this recorded interval.
        let i_lo = (t_l / lat.dt()).round() as usize;
        let i_hi = (traj.times()[l + 1] / lat.dt()).round() as usize;
        for j in 0..n {
            let mut xi = 0.0;
            for i in i_lo..i_hi {
                xi += noise.row(i)[j];
            }
            noise_acc += sigma.eval(t_l, lat.x(j), u_l[j]) * pv[j] * xi;
        }

        residuals.push(ip(traj.values_at(l + 1), pv) - base - drift_heat_acc - noise_acc);
    }
    Ok(residuals)
}

// ── Path regularity ──────────────────────────────────────────────────────

/// Which direction of the space-time grid an estimate scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Time,
    Space,
}

/// Log-log regression estimate of a Holder exponent.
#[derive(Debug, Clone, Serialize)]
pub struct HolderEstimate {
    pub axis: Axis,
    pub exponent: f64,
    /// Half-width of the 95% confidence interval of the regression slope.
    pub ci_half_width: f64,
    pub n_lags: usize,
    /// True when the fitted exponent indicates genuinely rough increments
    /// (below 3/4); deterministic smooth profiles fit ~1 and are flagged
    /// non-rough.
    pub rough: bool,
}

const TIME_LAG_MULTIPLIERS: [usize; 9] = [2, 3, 5, 8, 13, 22, 36, 60, 96];
const SPACE_LAG_MULTIPLIERS: [usize; 7] = [1, 2, 3, 6, 10, 18, 32];

/// Estimates the pathwise Holder exponent along one axis by regressing the
/// log median absolute increment on the log lag.
///
/// Medians are taken over anchors in the second half of the time interval
/// (away from the initial transient) and across the other axis. The lag
/// ladder spans a factor of about 50, enough leverage for a stable slope.
pub fn holder_exponent_estimate(traj: &Trajectory, axis: Axis) -> Result<HolderEstimate> {
    let lat = traj.lattice();
    let n_rec = traj.n_recorded();
    let n = lat.n_space();

    // Recorded spacing must be uniform for lag arithmetic.
    let times = traj.times();
    if n_rec >= 3 {
        let d0 = times[1] - times[0];
        for w in times.windows(2) {
            if ((w[1] - w[0]) / d0 - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidParameter("holder estimate needs uniformly recorded times".into()));
            }
        }
    }

    let (lags, spacing): (Vec<usize>, f64) = match axis {
        Axis::Time => {
            let cap = (n_rec - 1) / 4;
            (
                TIME_LAG_MULTIPLIERS.iter().copied().filter(|&l| l <= cap).collect(),
                if n_rec > 1 { times[1] - times[0] } else { 0.0 },
            )
        }
        Axis::Space => {
            let cap = (n - 1) / 4;
            (SPACE_LAG_MULTIPLIERS.iter().copied().filter(|&l| l <= cap).collect(), lat.dx())
        }
    };
    if lags.len() < 5 || (lags[lags.len() - 1] as f64 / lags[0] as f64) < 30.0 {
        return Err(Error::InvalidParameter(
            "grid too small for a holder estimate: need lags spanning 1.5 decades".into(),
        ));
    }

    let anchor_rows: Vec<usize> = {
        // Second half of the recorded window.
        let lo = n_rec / 2;
        let hi = n_rec - 1;
        let stride = ((hi - lo).max(1) / 64).max(1);
        (lo..=hi).step_by(stride).collect()
    };

    let mut log_lag = Vec::with_capacity(lags.len());
    let mut log_med = Vec::with_capacity(lags.len());
    for &lag in &lags {
        let mut samples = Vec::new();
        match axis {
            Axis::Time => {
                let stride_j = (n / 128).max(1);
                for &i in &anchor_rows {
                    if i + lag >= n_rec {
                        continue;
                    }
                    let a = traj.values_at(i);
                    let b = traj.values_at(i + lag);
                    let mut j = 0;
                    while j < n {
                        samples.push((b[j] - a[j]).abs());
                        j += stride_j;
                    }
                }
            }
            Axis::Space => {
                for &i in &anchor_rows {
                    let a = traj.values_at(i);
                    for j in 0..n - lag {
                        samples.push((a[j + lag] - a[j]).abs());
                    }
                }
            }
        }
        if samples.is_empty() {
            return Err(Error::InvalidParameter("no increment samples for a lag".into()));
        }
        let mid = samples.len() / 2;
        samples.select_nth_unstable_by(mid, f64::total_cmp);
        let median = samples[mid];
        if median == 0.0 {
            return Err(Error::DegenerateTrajectory("zero median increment: no variance along this axis"));
        }
        log_lag.push((lag as f64 * spacing).ln());
        log_med.push(median.ln());
    }

    // Ordinary least squares with the standard slope error.
    let k = log_lag.len() as f64;
    let mean_x = log_lag.iter().sum::<f64>() / k;
    let mean_y = log_med.iter().sum::<f64>() / k;
    let sxx: f64 = log_lag.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = log_lag.iter().zip(&log_med).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = log_lag
        .iter()
        .zip(&log_med)
        .map(|(x, y)| {
            let fit = mean_y + slope * (x - mean_x);
            (y - fit) * (y - fit)
        })
        .sum();
    let se = (ssr / (k - 2.0) / sxx).sqrt();

    Ok(HolderEstimate {
        axis,
        exponent: slope,
        ci_half_width: 1.96 * se,
        n_lags: lags.len(),
        rough: slope < 0.75,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{from_label, LadderConfig};
    use crate::kernel::semigroup_apply;
    use crate::lattice::build_lattice;
    use crate::noise::sample_noise;

    fn small(boundary: Boundary) -> Lattice {
        build_lattice(2.0, 0.1, 0.004, 0.1, boundary).unwrap()
    }

    fn cfg(lat: &Lattice) -> SolverConfig {
        SolverConfig::new(lat.clone())
    }

    #[test]
    fn simulate_is_a_fold_of_em_step() {
        let lat = small(Boundary::DirichletZero);
        let sigma = from_label("power_sigma:0.8").unwrap();
        let b = from_label("linear:-0.5").unwrap();
        let u0 = Field::from_fn(lat.clone(), |x| (1.0 - x * x / 4.0).max(0.0)).unwrap();
        let noise = sample_noise(&lat, 99);

        let traj = simulate(&cfg(&lat), &u0, &sigma, &b, &noise).unwrap();

        let mut manual = u0.clone();
        for i in 0..lat.n_time() {
            manual = em_step(&manual, noise.row(i), &sigma, &b, lat.t(i)).unwrap();
            let recorded = traj.values_at(i + 1);
            assert_eq!(manual.values(), recorded, "divergence at step {i}");
        }
    }

    #[test]
    fn zero_coefficients_preserve_constants_periodically() {
        let lat = small(Boundary::Periodic);
        let zero = from_label("zero").unwrap();
        let u0 = Field::constant(lat.clone(), 3.0).unwrap();
        let noise = sample_noise(&lat, 1);
        let traj = simulate(&cfg(&lat), &u0, &zero, &zero, &noise).unwrap();
        for k in 0..traj.n_recorded() {
            for &v in traj.values_at(k) {
                assert_eq!(v, 3.0);
            }
        }
    }

    #[test]
    fn unit_drift_integrates_linearly() {
        // sigma = 0, b = 1, u0 = 0 on the circle: u(t, x) = t up to roundoff.
        let lat = small(Boundary::Periodic);
        let traj = simulate(
            &cfg(&lat),
            &Field::constant(lat.clone(), 0.0).unwrap(),
            &from_label("zero").unwrap(),
            &from_label("const:1").unwrap(),
            &sample_noise(&lat, 5),
        )
        .unwrap();
        for k in 0..traj.n_recorded() {
            let t = traj.times()[k];
            for &v in traj.values_at(k) {
                assert!((v - t).abs() <= 1e-12, "u = {v} at t = {t}");
            }
        }
    }

    #[test]
    fn deterministic_heat_flow_tracks_the_semigroup() {
        let lat = build_lattice(8.0, 0.1, 0.004, 0.5, Boundary::DirichletZero).unwrap();
        let zero = from_label("zero").unwrap();
        let u0 = Field::from_fn(lat.clone(), |x| (-2.0 * x * x).exp()).unwrap();
        let traj = simulate(&cfg(&lat), &u0, &zero, &zero, &sample_noise(&lat, 0)).unwrap();
        let reference = semigroup_apply(&u0, 0.5).unwrap();
        let last = traj.field_at(traj.n_recorded() - 1).unwrap();
        let err = last.sup_distance(&reference).unwrap();
        assert!(err < 0.01, "sup error {err}");
    }

    #[test]
    fn blow_up_is_detected_and_indexed() {
        let lat = small(Boundary::DirichletZero);
        let mut config = cfg(&lat);
        config.clamp_threshold = 1e3;
        let grow = Coefficient::from_u_fn("superlinear", |u| 10.0 * u * u);
        let err = simulate(
            &config,
            &Field::constant(lat.clone(), 10.0).unwrap(),
            &from_label("zero").unwrap(),
            &grow,
            &sample_noise(&lat, 2),
        )
        .unwrap_err();
        match err {
            Error::BlowUp { time_index, sup } => {
                assert!(time_index >= 1);
                assert!(sup > 1e3);
            }
            other => panic!("expected BlowUp, got {other}"),
        }
    }

    #[test]
    fn coupled_rejects_unordered_initial_data() {
        let lat = small(Boundary::DirichletZero);
        let lo = Field::from_fn(lat.clone(), |x| if x == 0.0 { 1.0 } else { 0.0 }).unwrap();
        let hi = Field::constant(lat.clone(), 0.5).unwrap();
        let zero = from_label("zero").unwrap();
        let err = simulate_coupled(&cfg(&lat), &lo, &hi, &zero, &zero, &zero, &sample_noise(&lat, 3)).unwrap_err();
        match err {
            Error::InitialOrderViolation { index, .. } => assert_eq!(index, 20),
            other => panic!("expected InitialOrderViolation, got {other}"),
        }
    }

    #[test]
    fn coupled_identical_drifts_stay_identical() {
        let lat = small(Boundary::DirichletZero);
        let sigma = from_label("linear:1").unwrap();
        let b = from_label("const:0.3").unwrap();
        let u0 = Field::constant(lat.clone(), 1.0).unwrap();
        let noise = sample_noise(&lat, 17);
        let (lo, hi) = simulate_coupled(&cfg(&lat), &u0, &u0, &sigma, &b, &b, &noise).unwrap();
        assert_eq!(lo.sup_distance(&hi).unwrap(), 0.0);
        assert_eq!(lo.provenance().noise_checksum, hi.provenance().noise_checksum);
        let summary = ordering_violations(&lo, &hi, 0.0).unwrap();
        assert_eq!(summary.n_violations, 0);
    }

    #[test]
    fn ordered_drifts_order_the_solutions() {
        let lat = small(Boundary::DirichletZero);
        let sigma = from_label("linear:1").unwrap();
        let u0 = Field::constant(lat.clone(), 1.0).unwrap();
        let noise = sample_noise(&lat, 42);
        let (lo, hi) = simulate_coupled(
            &cfg(&lat),
            &u0,
            &u0,
            &sigma,
            &from_label("zero").unwrap(),
            &from_label("const:1").unwrap(),
            &noise,
        )
        .unwrap();
        let summary = ordering_violations(&lo, &hi, 10.0 * lat.dx()).unwrap();
        assert_eq!(summary.n_violations, 0);
        assert!(summary.worst_violation <= 0.0, "worst {}", summary.worst_violation);
    }

    #[test]
    fn residual_telescopes_at_full_recording() {
        let lat = build_lattice(5.0, 0.1, 0.004, 0.1, Boundary::DirichletZero).unwrap();
        let sigma = from_label("power_sigma:0.8").unwrap();
        let b = from_label("const:0.5").unwrap();
        let u0 = Field::from_fn(lat.clone(), |x| (-x * x).exp()).unwrap();
        let noise = sample_noise(&lat, 8);
        let traj = simulate(&cfg(&lat), &u0, &sigma, &b, &noise).unwrap();
        let phi = Field::from_fn(lat.clone(), |x| {
            if x.abs() < 1.0 { (-1.0 / (1.0 - x * x)).exp() } else { 0.0 }
        })
        .unwrap();
        let res = mild_residual(&traj, &phi, &noise, &sigma, &b).unwrap();
        let worst = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        assert!(worst < 1e-10, "residual {worst}");
    }

    #[test]
    fn residual_rejects_wide_test_functions() {
        let lat = build_lattice(5.0, 0.1, 0.004, 0.1, Boundary::DirichletZero).unwrap();
        let zero = from_label("zero").unwrap();
        let u0 = Field::constant(lat.clone(), 0.0).unwrap();
        let noise = sample_noise(&lat, 8);
        let traj = simulate(&cfg(&lat), &u0, &zero, &zero, &noise).unwrap();
        // Supported all the way to |x| = 4.5: margin 0.5 < 6 sqrt(0.1).
        let phi = Field::from_fn(lat, |x| (1.0 - (x / 4.5) * (x / 4.5)).max(0.0)).unwrap();
        assert!(matches!(
            mild_residual(&traj, &phi, &noise, &zero, &zero),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn residual_shrinks_under_refinement_when_subsampled() {
        // Deterministic heat flow, recording every 8th step: the residual is
        // the Riemann coarsening error, O(recorded spacing).
        let zero = from_label("zero").unwrap();
        let mut worsts = Vec::new();
        for (dx, dt) in [(0.1, 0.004), (0.05, 0.001)] {
            let lat = build_lattice(5.0, dx, dt, 0.1, Boundary::DirichletZero).unwrap();
            let mut config = cfg(&lat);
            config.record_every = 8;
            let u0 = Field::from_fn(lat.clone(), |x| (-4.0 * x * x).exp()).unwrap();
            let noise = sample_noise(&lat, 0);
            let traj = simulate(&config, &u0, &zero, &zero, &noise).unwrap();
            let phi = Field::from_fn(lat.clone(), |x| {
                if x.abs() < 1.5 { (-1.0 / (1.0 - (x / 1.5) * (x / 1.5))).exp() } else { 0.0 }
            })
            .unwrap();
            let res = mild_residual(&traj, &phi, &noise, &zero, &zero).unwrap();
            worsts.push(res.iter().fold(0.0f64, |m, r| m.max(r.abs())));
        }
        assert!(worsts[1] < 0.5 * worsts[0], "no refinement gain: {worsts:?}");
    }

    #[test]
    fn smooth_paths_are_flagged_non_rough() {
        let lat = build_lattice(8.0, 0.05, 0.00125, 1.0, Boundary::DirichletZero).unwrap();
        let zero = from_label("zero").unwrap();
        let u0 = Field::from_fn(lat.clone(), |x| (-x * x).exp()).unwrap();
        let traj = simulate(&cfg(&lat), &u0, &zero, &zero, &sample_noise(&lat, 0)).unwrap();
        let est = holder_exponent_estimate(&traj, Axis::Space).unwrap();
        assert!(!est.rough, "smooth profile flagged rough: {est:?}");
        assert!(est.exponent > 0.9, "exponent {}", est.exponent);
    }

    #[test]
    fn constant_paths_are_degenerate_for_holder() {
        let lat = build_lattice(8.0, 0.1, 0.004, 0.1, Boundary::Periodic).unwrap();
        let zero = from_label("zero").unwrap();
        let u0 = Field::constant(lat.clone(), 1.0).unwrap();
        let traj = simulate(&cfg(&lat), &u0, &zero, &zero, &sample_noise(&lat, 0)).unwrap();
        assert!(matches!(
            holder_exponent_estimate(&traj, Axis::Space),
            Err(Error::DegenerateTrajectory(_))
        ));
    }

    #[test]
    fn ladder_sequence_validates_and_labels() {
        let lat = small(Boundary::DirichletZero);
        let ladder = MollifierLadder::new(
            from_label("power_drift:0.9").unwrap(),
            LadderConfig { k_max: 8, table_spacing: 1e-3 },
        )
        .unwrap();
        let sigma = from_label("power_sigma:0.8").unwrap();
        let u0 = Field::constant(lat.clone(), 1.0).unwrap();
        let noise = sample_noise(&lat, 7);

        assert!(ladder_solution_sequence(&cfg(&lat), &u0, &sigma, &ladder, &noise, &[4, 2], 8).is_err());
        assert!(ladder_solution_sequence(&cfg(&lat), &u0, &sigma, &ladder, &noise, &[], 8).is_err());

        let runs = ladder_solution_sequence(&cfg(&lat), &u0, &sigma, &ladder, &noise, &[2, 4, 6], 8).unwrap();
        assert_eq!(runs.len(), 3);
        assert!(runs[0].provenance().drift_label.contains("n=2"));
        assert!(runs[2].provenance().drift_label.contains("n=6"));
        // All runs consumed the identical sheet.
        assert_eq!(
            runs[0].provenance().noise_checksum,
            runs[2].provenance().noise_checksum
        );
    }
}
