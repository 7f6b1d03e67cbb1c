//! Space-time white noise discretized on the lattice.
//!
//! The driving noise is a rectangular array of independent increments
//! `xi[i][j] ~ N(0, dt * dx)`: cell `(i, j)` is the white-noise mass of the
//! space-time rectangle `[t_i, t_i + dt) x [x_j, x_j + dx)`. Row `i` is what
//! the scheme consumes when stepping from `t_i` to `t_{i+1}`.
//!
//! Cells are counter-generated (see [`crate::rng`]), so a sheet is a pure
//! function of `(seed, lattice)` and any sub-rectangle can be regenerated
//! without materializing the rest.

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::rng::cell_standard_normal;

/// Snap tolerance when mapping continuum coordinates to cell boundaries.
const GRID_EPS: f64 = 1e-9;

/// Materialized noise sheet: `n_time` rows of `n_space` increments.
#[derive(Debug, Clone)]
pub struct NoiseSheet {
    lattice: Lattice,
    seed: u64,
    increments: Vec<f64>,
}

/// Draws the full sheet for `(lattice, seed)`.
pub fn sample_noise(lattice: &Lattice, seed: u64) -> NoiseSheet {
    let n = lattice.n_space();
    let scale = (lattice.dt() * lattice.dx()).sqrt();
    let mut increments = Vec::with_capacity(lattice.n_time() * n);
    for i in 0..lattice.n_time() {
        for j in 0..n {
            increments.push(scale * cell_standard_normal(seed, i as u64, j as u64));
        }
    }
    NoiseSheet {
        lattice: lattice.clone(),
        seed,
        increments,
    }
}

/// Streaming access: fills `out` with row `i` without materializing a sheet.
/// Produces bit-identical values to [`sample_noise`].
pub fn noise_row_into(lattice: &Lattice, seed: u64, i: usize, out: &mut [f64]) {
    assert_eq!(out.len(), lattice.n_space(), "row buffer length mismatch");
    assert!(i < lattice.n_time(), "row index {i} out of range");
    let scale = (lattice.dt() * lattice.dx()).sqrt();
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = scale * cell_standard_normal(seed, i as u64, j as u64);
    }
}

impl NoiseSheet {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Increments consumed by the step from `t_i` to `t_{i+1}`.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.lattice.n_space();
        &self.increments[i * n..(i + 1) * n]
    }

    pub fn increment(&self, i: usize, j: usize) -> f64 {
        self.increments[i * self.lattice.n_space() + j]
    }
}

/// Discrete Wiener integral `sum_{t_i < t_end} sum_j phi(t_i, x_j) xi[i][j]`.
///
/// The sum runs over all rows strictly before `t_end`, in row-major order.
pub fn integrate_test_function(
    sheet: &NoiseSheet,
    phi: impl Fn(f64, f64) -> f64,
    t_end: f64,
) -> Result<f64> {
    let lat = sheet.lattice();
    if !(t_end > 0.0 && t_end <= lat.horizon() * (1.0 + GRID_EPS)) {
        return Err(Error::TimeOutOfRange { t: t_end, horizon: lat.horizon() });
    }
    let n_rows = ((t_end / lat.dt() - GRID_EPS).ceil() as usize).min(lat.n_time());
    let mut acc = 0.0;
    for i in 0..n_rows {
        let t = lat.t(i);
        let row = sheet.row(i);
        for (j, &xi) in row.iter().enumerate() {
            acc += phi(t, lat.x(j)) * xi;
        }
    }
    if !acc.is_finite() {
        return Err(Error::InvalidParameter(
            "test function produced non-finite values over the sheet".into(),
        ));
    }
    Ok(acc)
}

/// Brownian-sheet point value by signed rectangle sums of full cells.
///
/// For `x >= 0` this is the sum of all cells inside `[0, t] x [0, x]`; for
/// `x < 0` the signed convention negates the sum over `[0, t] x [x, 0]`, so
/// that spatial increments `W(t, x2) - W(t, x1)` always aggregate the cells
/// of `[x1, x2)` with positive sign.
pub fn brownian_sheet_value(sheet: &NoiseSheet, t: f64, x: f64) -> Result<f64> {
    let lat = sheet.lattice();
    if !(0.0..=lat.horizon() * (1.0 + GRID_EPS)).contains(&t) || x.abs() > lat.half_width() * (1.0 + GRID_EPS) {
        return Err(Error::OutOfDomain { t, x });
    }
    let n_rows = ((t / lat.dt() + GRID_EPS).floor() as usize).min(lat.n_time());
    let n_cols = ((x.abs() / lat.dx() + GRID_EPS).floor() as usize).min((lat.n_space() - 1) / 2);
    let center = (lat.n_space() - 1) / 2;

    let mut acc = 0.0;
    for i in 0..n_rows {
        let row = sheet.row(i);
        if x >= 0.0 {
            for j in center..center + n_cols {
                acc += row[j];
            }
        } else {
            for j in center - n_cols..center {
                acc -= row[j];
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, Boundary};
    use crate::rng::cell_standard_normal;

    fn desk() -> Lattice {
        build_lattice(10.0, 0.1, 0.004, 1.0, Boundary::DirichletZero).unwrap()
    }

    #[test]
    fn sheet_is_reproducible_and_seed_sensitive() {
        let lat = desk();
        let a = sample_noise(&lat, 11);
        let b = sample_noise(&lat, 11);
        let c = sample_noise(&lat, 12);
        assert_eq!(a.increments, b.increments);
        assert_ne!(a.increments, c.increments);
    }

    #[test]
    fn streaming_rows_match_materialized_sheet() {
        let lat = desk();
        let sheet = sample_noise(&lat, 5);
        let mut buf = vec![0.0; lat.n_space()];
        for i in [0, 1, 137, lat.n_time() - 1] {
            noise_row_into(&lat, 5, i, &mut buf);
            assert_eq!(sheet.row(i), &buf[..]);
        }
    }

    #[test]
    fn cell_variance_matches_rectangle_area() {
        // Var xi = dt * dx = 4e-4, estimated over 1e6 cells.
        let lat = desk();
        let mut n = 0usize;
        let (mut s1, mut s2) = (0.0, 0.0);
        for seed in 0..20 {
            let sheet = sample_noise(&lat, seed);
            for &v in &sheet.increments {
                s1 += v;
                s2 += v * v;
                n += 1;
            }
        }
        assert!(n >= 1_000_000);
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        let target = lat.dt() * lat.dx();
        assert!((var / target - 1.0).abs() < 0.01, "variance {var} vs {target}");
        assert!(mean.abs() < 3.0 * (target / n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn sheet_value_equals_partition_sum() {
        // Split [0, t] x [0, x] into four sub-rectangles and re-sum the cells
        // directly from the counter generator; agreement is exact up to
        // floating-point reassociation.
        let lat = desk();
        let seed = 321;
        let sheet = sample_noise(&lat, seed);
        let (t, x) = (0.8, 6.0);
        let whole = brownian_sheet_value(&sheet, t, x).unwrap();

        let scale = (lat.dt() * lat.dx()).sqrt();
        let center = (lat.n_space() - 1) / 2;
        let rows = (t / lat.dt()).round() as usize;
        let cols = (x / lat.dx()).round() as usize;
        let mut parts = 0.0;
        for (r0, r1, c0, c1) in [
            (0, rows / 2, 0, cols / 3),
            (0, rows / 2, cols / 3, cols),
            (rows / 2, rows, 0, cols / 3),
            (rows / 2, rows, cols / 3, cols),
        ] {
            let mut s = 0.0;
            for i in r0..r1 {
                for j in c0..c1 {
                    s += scale * cell_standard_normal(seed, i as u64, (center + j) as u64);
                }
            }
            parts += s;
        }
        assert!((whole - parts).abs() < 1e-12, "whole {whole} vs parts {parts}");
    }

    #[test]
    fn negative_axis_uses_signed_convention() {
        let lat = desk();
        let sheet = sample_noise(&lat, 9);
        let (x1, x2) = (-0.3, 0.2);
        let incr = brownian_sheet_value(&sheet, 1.0, x2).unwrap()
            - brownian_sheet_value(&sheet, 1.0, x1).unwrap();

        // Direct sum over the columns anchored in [x1, x2).
        let center = (lat.n_space() - 1) / 2;
        let mut direct = 0.0;
        for i in 0..lat.n_time() {
            let row = sheet.row(i);
            for j in center - 3..center + 2 {
                direct += row[j];
            }
        }
        assert!((incr - direct).abs() < 1e-12, "incr {incr} vs direct {direct}");
    }

    #[test]
    fn integral_variance_counts_every_cell() {
        // Var W_T(1) = #cells * dt * dx = T * (2L + dx).
        let lat = build_lattice(2.0, 0.1, 0.004, 0.5, Boundary::DirichletZero).unwrap();
        let n_sheets = 10_000;
        let mut values = Vec::with_capacity(n_sheets);
        for seed in 0..n_sheets as u64 {
            let sheet = sample_noise(&lat, seed);
            values.push(integrate_test_function(&sheet, |_, _| 1.0, 0.5).unwrap());
        }
        let mean = values.iter().sum::<f64>() / n_sheets as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_sheets as f64;
        let target = 0.5 * (2.0 * 2.0 + 0.1);
        assert!((var / target - 1.0).abs() < 0.05, "variance {var} vs {target}");

        // Consecutive seeds behave as independent realizations.
        let mut cross = 0.0;
        for k in 0..n_sheets - 1 {
            cross += (values[k] - mean) * (values[k + 1] - mean);
        }
        let corr = cross / (n_sheets as f64 - 1.0) / var;
        assert!(corr.abs() < 0.05, "cross-correlation {corr}");
    }

    #[test]
    fn integral_rejects_times_outside_horizon() {
        let lat = desk();
        let sheet = sample_noise(&lat, 1);
        assert!(matches!(
            integrate_test_function(&sheet, |_, _| 1.0, 1.5),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            integrate_test_function(&sheet, |_, _| 1.0, 0.0),
            Err(Error::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn sheet_value_rejects_points_outside_domain() {
        let lat = desk();
        let sheet = sample_noise(&lat, 1);
        assert!(matches!(
            brownian_sheet_value(&sheet, 0.5, 11.0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            brownian_sheet_value(&sheet, -0.1, 1.0),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
