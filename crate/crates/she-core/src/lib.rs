//! Lattice solvers and verification tools for the one-dimensional stochastic
//! heat equation with multiplicative space-time white noise,
//!
//! ```text
//!   du/dt = (1/2) d^2u/dx^2 + sigma(t, x, u) W_dot + b(t, x, u),
//! ```
//!
//! truncated to `[-L, L]` and discretized by an explicit Euler-Maruyama
//! scheme. The crate provides the building blocks — lattices and weighted
//! norms, reproducible counter-based noise sheets, heat-kernel evaluation and
//! bound audits, coefficient families with mollified drift ladders, the
//! solver itself, and Girsanov weight accounting — that the `she-lab` binary
//! assembles into experiments.
//!
//! Everything is deterministic given a seed: noise cells are pure functions
//! of `(seed, i, j)`, and all reductions run in a fixed order, so identical
//! inputs produce bit-identical outputs.

// Negated float comparisons like `!(dt > 0.0)` are deliberate: unlike
// `dt <= 0.0`, they also reject NaN in one test. Indexed loops over lattice
// sites are kept where several parallel arrays share the site index.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coefficients;
pub mod error;
pub mod girsanov;
pub mod kernel;
pub(crate) mod quad;
pub mod lattice;
pub mod noise;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use girsanov::{log_weight, mean_weight_test, novikov_estimate, stopping_time, z_field, GirsanovWeight, ZField};
pub use coefficients::{from_label, power_law_pair, Coefficient, MollifierLadder};
pub use kernel::{audit_kernel_bounds, heat_kernel, kernel_l2_increment, kernel_l2_increment_analytic, semigroup_apply, KernelBound};
pub use lattice::{build_lattice, ctem_profile, weighted_sup_norm, Boundary, Field, Lattice};
pub use noise::{brownian_sheet_value, integrate_test_function, sample_noise, NoiseSheet};
pub use rng::RNG_ID;
pub use solver::{em_step, holder_exponent_estimate, mild_residual, ordering_violations, simulate, simulate_coupled, Axis, HolderEstimate, Provenance, SolverConfig, Trajectory};

/// Identifier of the time-stepping scheme recorded in provenance blocks;
/// bump when the update rule changes in any way that alters trajectories.
pub const SCHEME_VERSION: &str = "explicit-em/1";
