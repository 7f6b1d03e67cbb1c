//! Space-time lattice on `[-L, L] x [0, T]` and grid fields over it.
//!
//! The spatial grid has an odd number of points so that `x = 0` is always a
//! grid point, and the explicit scheme's stability region `dt <= dx^2 / 2` is
//! enforced at construction: a lattice that exists is safe to step on.
//!
//! Weighted sup norms
//! ```text
//!   ||f||_lambda = sup_x |f(x)| exp(-lambda |x|)
//! ```
//! measure growth at spatial infinity; `lambda > 0` tolerates exponentially
//! growing profiles, `lambda < 0` demands exponential decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary rule applied by the discrete Laplacian and by spatial quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Ghost value 0 outside `[-L, L]`; every grid point evolves.
    DirichletZero,
    /// Index wrap-around: the grid is a circle of circumference `2L + dx`.
    Periodic,
}

/// Uniform space-time grid. Construct via [`build_lattice`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    half_width: f64,
    dx: f64,
    dt: f64,
    n_space: usize,
    n_time: usize,
    horizon: f64,
    boundary: Boundary,
}

/// Relative slack when checking that a spacing divides its extent.
const DIVISIBILITY_TOL: f64 = 1e-9;

/// Builds a lattice over `[-L, L] x [0, T]`, validating geometry and the
/// explicit-scheme stability bound `dt <= dx^2 / 2`.
pub fn build_lattice(
    half_width: f64,
    dx: f64,
    dt: f64,
    horizon: f64,
    boundary: Boundary,
) -> Result<Lattice> {
    for (name, v) in [
        ("half_width", half_width),
        ("dx", dx),
        ("dt", dt),
        ("horizon", horizon),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::GeometryError(format!("{name} must be positive and finite, got {v}")));
        }
    }

    let n_cells = divide_exactly(2.0 * half_width, dx).ok_or_else(|| {
        Error::GeometryError(format!("dx = {dx} does not divide the domain width {}", 2.0 * half_width))
    })?;
    if n_cells % 2 != 0 {
        return Err(Error::GeometryError(format!(
            "dx = {dx} does not place x = 0 on the grid (half-width {half_width})"
        )));
    }
    if n_cells < 2 {
        return Err(Error::GeometryError("grid needs at least 3 spatial points".into()));
    }

    let n_time = divide_exactly(horizon, dt).ok_or_else(|| {
        Error::GeometryError(format!("dt = {dt} does not divide the horizon {horizon}"))
    })?;
    if n_time == 0 {
        return Err(Error::GeometryError("horizon shorter than one time step".into()));
    }

    let limit = 0.5 * dx * dx;
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::StabilityViolation { dt, limit });
    }

    Ok(Lattice {
        half_width,
        dx,
        dt,
        n_space: n_cells + 1,
        n_time,
        horizon,
        boundary,
    })
}

/// Rounds `a / b` to the nearest integer, accepting it only if the quotient
/// is an integer up to relative tolerance.
fn divide_exactly(a: f64, b: f64) -> Option<usize> {
    let q = a / b;
    let n = q.round();
    if (q - n).abs() <= DIVISIBILITY_TOL * q.abs().max(1.0) && n >= 0.0 {
        Some(n as usize)
    } else {
        None
    }
}

impl Lattice {
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of spatial grid points (odd).
    pub fn n_space(&self) -> usize {
        self.n_space
    }

    /// Number of time steps; the grid has `n_time + 1` time levels.
    pub fn n_time(&self) -> usize {
        self.n_time
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Coordinate of spatial index `j`; exact zero at the central index.
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - ((self.n_space - 1) / 2) as f64) * self.dx
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_space).map(move |j| self.x(j))
    }

    /// Trapezoid weight for spatial quadrature: sums of `f_j * w_j * dx`
    /// integrate over `[-L, L]` with the endpoints shared, so a constant
    /// integrates to exactly `2L`. On the periodic circle every point
    /// carries full weight.
    pub fn quadrature_weight(&self, j: usize) -> f64 {
        match self.boundary {
            Boundary::DirichletZero if j == 0 || j == self.n_space - 1 => 0.5,
            _ => 1.0,
        }
    }

    /// `sum_j f_j w_j dx` over the spatial grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_space);
        let mut acc = 0.0;
        for (j, &v) in values.iter().enumerate() {
            acc += v * self.quadrature_weight(j);
        }
        acc * self.dx
    }
}

/// Real-valued function sampled on the spatial grid of one lattice.
///
/// Values are validated finite at construction, so downstream code can treat
/// a `Field` as certified data; anything that creates non-finite values must
/// re-validate before wrapping.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    lattice: Lattice,
    values: Vec<f64>,
}

impl Field {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.n_space() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values but the grid has {} points",
                values.len(),
                lattice.n_space()
            )));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteField { index, value });
            }
        }
        Ok(Self { lattice, values })
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = lattice.xs().map(&f).collect();
        Self::new(lattice, values)
    }

    pub fn constant(lattice: Lattice, c: f64) -> Result<Self> {
        let n = lattice.n_space();
        Self::new(lattice, vec![c; n])
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest pointwise distance to another field on the same lattice.
    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch("fields live on different lattices"));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.values.iter().zip(&other.values) {
            worst = worst.max((a - b).abs());
        }
        Ok(worst)
    }
}

/// Weighted sup norm `max_j |f(x_j)| exp(-lambda |x_j|)`.
pub fn weighted_sup_norm(field: &Field, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("weight exponent must be finite, got {lambda}")));
    }
    let lat = field.lattice();
    let mut best = 0.0f64;
    for (j, &v) in field.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteField { index: j, value: v });
        }
        best = best.max(v.abs() * (-lambda * lat.x(j).abs()).exp());
    }
    Ok(best)
}

/// One row of a weighted-norm profile.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CtemProfileRow {
    pub lambda: f64,
    /// `sup_{recorded t} max_j |u(t, x_j)| exp(-lambda |x_j|)`.
    pub sup_weighted_norm: f64,
}

/// Profiles a trajectory through the family of weighted sup norms: for each
/// requested weight exponent, the largest weighted norm over all recorded
/// times. Raising a row to the `p`-th power gives the natural pathwise
/// estimate of the `(p, p * lambda)` moment functional.
pub fn ctem_profile(traj: &crate::solver::Trajectory, lambdas: &[f64]) -> Result<Vec<CtemProfileRow>> {
    if lambdas.is_empty() {
        return Err(Error::EmptyInput("weight exponent list"));
    }
    let lat = traj.lattice();
    let n = lat.n_space();
    lambdas
        .iter()
        .map(|&lambda| {
            if !lambda.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "weight exponent must be finite, got {lambda}"
                )));
            }
            let weights: Vec<f64> = (0..n).map(|j| (-lambda * lat.x(j).abs()).exp()).collect();
            let mut best = 0.0f64;
            for k in 0..traj.n_recorded() {
                let row = traj.values_at(k);
                for j in 0..n {
                    best = best.max(row[j].abs() * weights[j]);
                }
            }
            Ok(CtemProfileRow { lambda, sup_weighted_norm: best })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk() -> Lattice {
        build_lattice(10.0, 0.1, 0.004, 1.0, Boundary::DirichletZero).unwrap()
    }

    #[test]
    fn desk_scale_counts() {
        let lat = desk();
        assert_eq!(lat.n_space(), 201);
        assert_eq!(lat.n_time(), 250);
        assert_eq!(lat.x(0), -10.0);
        assert_eq!(lat.x(100), 0.0);
        assert_eq!(lat.x(200), 10.0);
        assert!((lat.t(250) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unstable_time_step() {
        let err = build_lattice(10.0, 0.1, 0.01, 1.0, Boundary::DirichletZero).unwrap_err();
        match err {
            Error::StabilityViolation { dt, limit } => {
                assert_eq!(dt, 0.01);
                assert!((limit - 0.005).abs() < 1e-15);
            }
            other => panic!("expected StabilityViolation, got {other}"),
        }
    }

    #[test]
    fn accepts_time_step_on_the_stability_boundary() {
        build_lattice(10.0, 0.1, 0.005, 1.0, Boundary::DirichletZero).unwrap();
    }

    #[test]
    fn rejects_non_dividing_spacing() {
        let err = build_lattice(1.0, 0.3, 0.01, 1.0, Boundary::DirichletZero).unwrap_err();
        assert!(matches!(err, Error::GeometryError(_)), "got {err}");
    }

    #[test]
    fn rejects_grid_without_origin() {
        // 2L/dx = 7 is an integer but odd, so x = 0 would fall between points.
        let err = build_lattice(1.05, 0.3, 0.01, 1.0, Boundary::DirichletZero).unwrap_err();
        assert!(matches!(err, Error::GeometryError(_)), "got {err}");
    }

    #[test]
    fn rejects_non_dividing_time_step() {
        let err = build_lattice(10.0, 0.1, 0.003, 1.0, Boundary::DirichletZero).unwrap_err();
        assert!(matches!(err, Error::GeometryError(_)), "got {err}");
    }

    #[test]
    fn constant_integrates_to_exact_domain_width() {
        // Trapezoid endpoint halving makes the weights sum to 2L/dx exactly.
        let lat = desk();
        let ones = vec![1.0; lat.n_space()];
        assert_eq!(lat.integrate(&ones), 20.0);
    }

    #[test]
    fn field_construction_names_first_bad_index() {
        let lat = desk();
        let mut values = vec![0.0; lat.n_space()];
        values[5] = f64::NAN;
        values[7] = f64::INFINITY;
        let err = Field::new(lat, values).unwrap_err();
        match err {
            Error::NonFiniteField { index, .. } => assert_eq!(index, 5),
            other => panic!("expected NonFiniteField, got {other}"),
        }
    }

    #[test]
    fn linear_profile_weighted_norm() {
        // |x| e^{-|x|} peaks at |x| = 1 with value e^{-1}.
        let lat = desk();
        let f = Field::from_fn(lat, |x| x).unwrap();
        let norm = weighted_sup_norm(&f, 1.0).unwrap();
        assert!((norm - (-1.0f64).exp()).abs() < 1e-12, "norm {norm}");
    }

    #[test]
    fn zero_weight_is_plain_sup() {
        let lat = desk();
        let f = Field::from_fn(lat, |x| x).unwrap();
        assert!((weighted_sup_norm(&f, 0.0).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn profile_rows_shrink_with_heavier_weights() {
        use crate::coefficients::from_label;
        use crate::noise::sample_noise;
        use crate::solver::{simulate, SolverConfig};

        let lat = build_lattice(2.0, 0.1, 0.004, 0.1, Boundary::DirichletZero).unwrap();
        let zero = from_label("zero").unwrap();
        let u0 = Field::from_fn(lat.clone(), |x| x).unwrap();
        let traj =
            simulate(&SolverConfig::new(lat.clone()), &u0, &zero, &zero, &sample_noise(&lat, 0)).unwrap();

        assert!(matches!(ctem_profile(&traj, &[]), Err(Error::EmptyInput(_))));
        let rows = ctem_profile(&traj, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(rows.len(), 3);
        // Heavier exponential damping can only lower the norm.
        assert!(rows[0].sup_weighted_norm >= rows[1].sup_weighted_norm);
        assert!(rows[1].sup_weighted_norm >= rows[2].sup_weighted_norm);
        // The t = 0 linear profile dominates: plain sup is exactly 2.
        assert_eq!(rows[0].sup_weighted_norm, 2.0);
    }
}
