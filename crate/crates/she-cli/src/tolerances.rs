//! Default thresholds used by experiment verdicts.
//!
//! Every constant here can be overridden per-experiment in the TOML config;
//! the values below are the defaults the sample configs rely on.

/// Pathwise ordering slack in units of `dx`. The comparison principle is a
/// continuum statement; the explicit scheme can dip below the exact
/// ordering by a few cells' worth of noise, so violations are only counted
/// beyond this many grid cells.
pub const ORDERING_TOLERANCE_CELLS: f64 = 10.0;

/// Fraction of seeds whose ladder runs must be pairwise ordered (within the
/// cell tolerance) for the ladder ordering verdict to pass.
pub const ORDERED_SEED_FRACTION: f64 = 0.9;

/// Fraction of seeds whose consecutive-level gaps must shrink from the
/// first level pair to the last, evidencing convergence of the ladder.
pub const CONTRACTION_SEED_FRACTION: f64 = 0.8;

/// Relative tolerance for weighted-moment stability across grid refinement
/// and domain widening. Monte-Carlo noise with 100 seeds plus genuine
/// discretization drift both live inside this band.
pub const MOMENT_STABILITY_REL: f64 = 0.3;

/// The unweighted (`lambda = 0`) control moment must grow by at least this
/// multiple when the domain doubles, showing the plain sup functional is
/// not domain-stable for growing data.
pub const MOMENT_CONTROL_GROWTH_MIN: f64 = 1.5;

/// Acceptance window for the fitted time-direction Holder exponent
/// (theoretical value 1/4 for near-additive noise).
pub const TIME_EXPONENT_WINDOW: (f64, f64) = (0.2, 0.3);

/// Acceptance window for the fitted space-direction Holder exponent
/// (theoretical value 1/2).
pub const SPACE_EXPONENT_WINDOW: (f64, f64) = (0.4, 0.6);

/// Width of the mean-weight test in standard errors.
pub const MEAN_WEIGHT_SIGMAS: f64 = 3.0;

/// Relative drift allowed in a kernel audit's worst ratio when the sweep
/// resolution doubles; a stable worst ratio means the sweep has resolved
/// the extremal region.
pub const AUDIT_STABILITY_REL: f64 = 0.2;

/// Relative tolerance for the closed-form spot value of the kernel modulus
/// (`sqrt(t / pi)` in the unweighted self case).
pub const SPOT_CHECK_REL: f64 = 0.01;

/// Allowed relative disagreement between the midpoint and closed-form
/// kernel-modulus routes at default quadrature resolution; dominated by the
/// midpoint rule's endpoint-singularity deficit, which is O(sqrt(ds)).
pub const ROUTE_AGREEMENT_REL: f64 = 0.02;
