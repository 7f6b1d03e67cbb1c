//! Change-of-measure accounting for drift removal.
//!
//! When the drift factors through the diffusion as `b = Z sigma` with `Z`
//! bounded, the exponential weight
//! ```text
//!   log L_t = int_0^t int Z dW  -  (1/2) int_0^t int Z^2 dy ds
//! ```
//! tilts the driftless law onto the drifted one. On the lattice the
//! stochastic integral is the predictable left-endpoint sum of `Z` against
//! the raw noise cells (every column carries a full `dt dx` cell, so its
//! variance is `(2L + dx) t` for constant `Z`), while the compensator and
//! the quadratic-variation clock use the trapezoid space quadrature over
//! `[-L, L]`. The `O(dx)` mismatch between the two conventions is the
//! boundary half-cell and vanishes under refinement.

use serde::Serialize;

use crate::coefficients::Coefficient;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::noise::NoiseSheet;
use crate::solver::Trajectory;

/// Tolerance below which a diffusion value counts as vanishing when
/// factoring the drift.
pub const FACTORIZATION_ATOL: f64 = 1e-12;

/// A time-indexed family of grid functions `Z(t_l, x_j)`, extended to all
/// times by left-continuous piecewise-constant interpolation. A single time
/// row at `t = 0` represents a time-independent `Z`.
#[derive(Debug, Clone)]
pub struct ZField {
    lattice: Lattice,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ZField {
    pub fn new(lattice: Lattice, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyInput("z-field time list"));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidTimes("z-field times must start at 0".into()));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidTimes("z-field times must be strictly increasing".into()));
        }
        if values.len() != times.len() * lattice.n_space() {
            return Err(Error::LatticeMismatch("z-field value count does not match times x grid"));
        }
        for (index, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteField { index, value: v });
            }
        }
        Ok(Self { lattice, times, values })
    }

    /// Time-independent `Z = c`.
    pub fn constant(lattice: Lattice, c: f64) -> Result<Self> {
        let n = lattice.n_space();
        Self::new(lattice, vec![0.0], vec![c; n])
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn row(&self, l: usize) -> &[f64] {
        let n = self.lattice.n_space();
        &self.values[l * n..(l + 1) * n]
    }

    /// Index of the row in force at time `t` (latest row time `<= t`).
    fn row_index_at(&self, t: f64) -> usize {
        let eps = 1e-9 * self.lattice.dt();
        let mut l = 0;
        while l + 1 < self.times.len() && self.times[l + 1] <= t + eps {
            l += 1;
        }
        l
    }
}

/// Factors the drift through the diffusion along a trajectory:
/// `Z(t, x) = b(t, x, u(t, x)) / sigma(t, x, u(t, x))` at every recorded
/// point. Where the diffusion vanishes the drift must vanish too; otherwise
/// the factorization assumption fails at that point.
pub fn z_field(b: &Coefficient, sigma: &Coefficient, traj: &Trajectory) -> Result<ZField> {
    let lat = traj.lattice().clone();
    let n = lat.n_space();
    let mut values = Vec::with_capacity(traj.n_recorded() * n);
    for k in 0..traj.n_recorded() {
        let t = traj.times()[k];
        let row = traj.values_at(k);
        for j in 0..n {
            let x = lat.x(j);
            let s = sigma.eval(t, x, row[j]);
            let drift = b.eval(t, x, row[j]);
            if s.abs() <= FACTORIZATION_ATOL {
                if drift.abs() <= FACTORIZATION_ATOL {
                    values.push(0.0);
                } else {
                    return Err(Error::AssumptionAViolation { t, x, b: drift });
                }
            } else {
                values.push(drift / s);
            }
        }
    }
    ZField::new(lat, traj.times().to_vec(), values)
}

/// Running Girsanov exponent and quadratic-variation clock, sampled at
/// every lattice step time.
#[derive(Debug, Clone)]
pub struct GirsanovWeight {
    pub times: Vec<f64>,
    pub log_l: Vec<f64>,
    pub quad_var: Vec<f64>,
    pub seed: u64,
}

impl GirsanovWeight {
    pub fn terminal_log_l(&self) -> f64 {
        *self.log_l.last().unwrap()
    }

    pub fn terminal_quad_var(&self) -> f64 {
        *self.quad_var.last().unwrap()
    }
}

/// Accumulates the exponential weight of a `Z`-field along a noise sheet.
///
/// Both running sums are predictable: each step uses the `Z`-row in force
/// at the step's left endpoint.
pub fn log_weight(z: &ZField, noise: &NoiseSheet) -> Result<GirsanovWeight> {
    if z.lattice() != noise.lattice() {
        return Err(Error::LatticeMismatch("z-field and noise sheet live on different lattices"));
    }
    let lat = z.lattice().clone();
    let n = lat.n_space();
    let dt = lat.dt();

    let mut times = Vec::with_capacity(lat.n_time() + 1);
    let mut log_l = Vec::with_capacity(lat.n_time() + 1);
    let mut quad_var = Vec::with_capacity(lat.n_time() + 1);
    times.push(0.0);
    log_l.push(0.0);
    quad_var.push(0.0);

    let mut cur_row = usize::MAX;
    let mut sq_integral = 0.0;
    let mut zsq = vec![0.0; n];
    let mut acc_log = 0.0;
    let mut acc_qv = 0.0;

    for i in 0..lat.n_time() {
        let t = lat.t(i);
        let l = z.row_index_at(t);
        if l != cur_row {
            let zr = z.row(l);
            for j in 0..n {
                zsq[j] = zr[j] * zr[j];
            }
            sq_integral = lat.integrate(&zsq);
            cur_row = l;
        }
        let zr = z.row(l);
        let xi = noise.row(i);
        let mut stoch = 0.0;
        for j in 0..n {
            stoch += zr[j] * xi[j];
        }
        acc_log += stoch - 0.5 * dt * sq_integral;
        acc_qv += dt * sq_integral;
        times.push(lat.t(i + 1));
        log_l.push(acc_log);
        quad_var.push(acc_qv);
    }

    Ok(GirsanovWeight { times, log_l, quad_var, seed: noise.seed() })
}

/// Novikov bound `exp((1/2) <Z>_T)` for the terminal clock; refuses
/// exponents that overflow a double.
pub fn novikov_estimate(weight: &GirsanovWeight) -> Result<f64> {
    let e = 0.5 * weight.terminal_quad_var();
    if e > 700.0 {
        return Err(Error::ParameterOutOfRegime(format!(
            "novikov exponent {e} overflows: weight is far outside the usable regime"
        )));
    }
    Ok(e.exp())
}

/// First crossing of a threshold by either of two nondecreasing clocks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StoppingState {
    pub index: usize,
    pub time: f64,
    /// False when neither clock reached the threshold before the horizon,
    /// in which case `time` is the final time (the stopped clock ran out).
    pub crossed: bool,
}

/// `inf { t : acc_a(t) >= threshold or acc_b(t) >= threshold }`, capped at
/// the final time. Both accumulators must be nondecreasing clocks.
pub fn stopping_time(times: &[f64], acc_a: &[f64], acc_b: &[f64], threshold: f64) -> Result<StoppingState> {
    if times.is_empty() {
        return Err(Error::EmptyInput("stopping-time grid"));
    }
    if acc_a.len() != times.len() || acc_b.len() != times.len() {
        return Err(Error::InvalidParameter("accumulator length does not match the time grid".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter("stopping threshold must be positive".into()));
    }
    for acc in [acc_a, acc_b] {
        for (i, w) in acc.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::NonMonotoneAccumulator(i + 1));
            }
        }
    }
    for i in 0..times.len() {
        if acc_a[i] >= threshold || acc_b[i] >= threshold {
            return Ok(StoppingState { index: i, time: times[i], crossed: true });
        }
    }
    let last = times.len() - 1;
    Ok(StoppingState { index: last, time: times[last], crossed: false })
}

/// Ensemble verdict on `E[L_T] = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct MeanWeightReport {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `|mean - 1| <= 3 stderr`.
    pub pass: bool,
    /// Average terminal clock above 1: the weight distribution is heavy
    /// enough that the three-sigma test loses power.
    pub high_variance: bool,
    pub mean_quad_var: f64,
}

/// Tests `E[L_T] = 1` over an ensemble of independent-seed weights.
pub fn mean_weight_test(weights: &[GirsanovWeight]) -> Result<MeanWeightReport> {
    const NEED: usize = 100;
    if weights.len() < NEED {
        return Err(Error::InsufficientEnsemble { got: weights.len(), need: NEED });
    }
    let n = weights.len();
    let mut sum = 0.0;
    let mut qv_sum = 0.0;
    let mut terminal = Vec::with_capacity(n);
    for w in weights {
        let l = w.terminal_log_l().exp();
        if !l.is_finite() {
            return Err(Error::InvalidParameter(
                "a terminal weight overflowed; the ensemble mean is meaningless".into(),
            ));
        }
        terminal.push(l);
        sum += l;
        qv_sum += w.terminal_quad_var();
    }
    let mean = sum / n as f64;
    let var = terminal.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (n - 1) as f64;
    let stderr = (var / n as f64).sqrt();
    let mean_quad_var = qv_sum / n as f64;
    Ok(MeanWeightReport {
        n,
        mean,
        stderr,
        pass: (mean - 1.0).abs() <= 3.0 * stderr,
        high_variance: mean_quad_var > 1.0,
        mean_quad_var,
    })
}
