//! Error taxonomy shared by all modules.
//!
//! Numerical failures are surfaced loudly and early: a field that has gone
//! non-finite, a scheme that has left its stability region, or a quadrature
//! that cannot meet its error target is a hard error, never a silent NaN.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Time step too large for the explicit scheme: requires dt <= dx^2 / 2.
    #[error("stability violation: dt = {dt} exceeds dx^2/2 = {limit}")]
    StabilityViolation { dt: f64, limit: f64 },

    /// Spacings that do not tile the requested domain, or degenerate counts.
    #[error("geometry error: {0}")]
    GeometryError(String),

    /// A field value is NaN or infinite; reports the first offending index.
    #[error("non-finite field value {value} at index {index}")]
    NonFiniteField { index: usize, value: f64 },

    /// An operation received an empty list where at least one entry is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A requested time lies outside the lattice horizon.
    #[error("time {t} out of range [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    /// A requested space-time point lies outside the closed grid domain.
    #[error("point (t={t}, x={x}) outside the grid domain")]
    OutOfDomain { t: f64, x: f64 },

    /// The heat kernel is only defined for strictly positive time.
    #[error("non-positive time {0} for heat kernel evaluation")]
    NonPositiveTime(f64),

    /// Invalid time pair handed to an increment integral.
    #[error("invalid times: {0}")]
    InvalidTimes(String),

    /// A kernel-bound audit was asked to run over zero cases.
    #[error("empty sweep: audit requires at least one case")]
    EmptySweep,

    /// Quadrature error estimate exceeded its relative target.
    #[error("quadrature failure: estimated relative error {estimate:.3e} exceeds target {target:.3e}")]
    QuadratureFailure { estimate: f64, target: f64 },

    /// Coefficient parameters outside the admissible regime.
    #[error("parameter out of regime: {0}")]
    ParameterOutOfRegime(String),

    /// The solution exceeded the clamp threshold (or went non-finite).
    #[error("blow-up at time index {time_index}: sup |u| = {sup}")]
    BlowUp { time_index: usize, sup: f64 },

    /// Coupled simulation requires ordered initial data.
    #[error("initial order violation at index {index}: {lower} > {upper}")]
    InitialOrderViolation { index: usize, lower: f64, upper: f64 },

    /// Test function support reaches too close to the domain boundary.
    #[error("support violation: {0}")]
    SupportViolation(String),

    /// A path statistic was requested on a trajectory with zero variance.
    #[error("degenerate trajectory: {0}")]
    DegenerateTrajectory(&'static str),

    /// Drift does not factor through the noise coefficient: sigma = 0 but b != 0.
    #[error("drift factorization violated at (t={t}, x={x}): sigma = 0 but b = {b}")]
    AssumptionAViolation { t: f64, x: f64, b: f64 },

    /// Two objects that must share a lattice do not.
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(&'static str),

    /// A quadratic-variation accumulator decreased.
    #[error("non-monotone accumulator at index {0}")]
    NonMonotoneAccumulator(usize),

    /// Ensemble statistics require a minimum number of realizations.
    #[error("insufficient ensemble: {got} realizations, need at least {need}")]
    InsufficientEnsemble { got: usize, need: usize },

    /// Catch-all for precondition violations on operation arguments.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
