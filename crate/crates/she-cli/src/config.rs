//! TOML experiment configuration.
//!
//! One config file drives any experiment; each experiment reads the
//! sections it needs and ignores the rest. Unknown keys are rejected so
//! typos fail loudly (exit code 3).

use std::path::Path;

use serde::Deserialize;
use she_core::{build_lattice, from_label, Boundary, Coefficient, Field, Lattice};

use crate::tolerances;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Grid geometry; required by every experiment except `kernel_audit`.
    pub lattice: Option<LatticeSection>,
    #[serde(default)]
    pub coefficients: CoefficientsSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub comparison: ComparisonSection,
    #[serde(default)]
    pub ladder: LadderSection,
    #[serde(default)]
    pub moments: MomentsSection,
    #[serde(default)]
    pub holder: HolderSection,
    #[serde(default)]
    pub girsanov: GirsanovSection,
    #[serde(default)]
    pub kernel_audit: KernelAuditSection,
    #[serde(default)]
    pub dump: DumpSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub half_width: f64,
    pub dx: f64,
    pub dt: f64,
    pub horizon: f64,
    pub boundary: Boundary,
}

impl LatticeSection {
    pub fn build(&self) -> CliResult<Lattice> {
        build_lattice(self.half_width, self.dx, self.dt, self.horizon, self.boundary)
            .map_err(|e| CliError::Config(format!("invalid [lattice]: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientsSection {
    pub sigma: String,
    pub drift: String,
    /// Drift of the lower solution in coupled experiments.
    pub drift_lower: String,
    /// Drift of the upper solution in coupled experiments.
    pub drift_upper: String,
    pub u0: String,
}

impl Default for CoefficientsSection {
    fn default() -> Self {
        Self {
            sigma: "const:1".into(),
            drift: "zero".into(),
            drift_lower: "zero".into(),
            drift_upper: "const:1".into(),
            u0: "zero".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seeds: u64,
    pub seed_offset: u64,
    pub record_every: usize,
    pub clamp_threshold: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seeds: 100, seed_offset: 0, record_every: 1, clamp_threshold: 1e9 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComparisonSection {
    /// Ordering slack in units of `dx`.
    pub tolerance_cells: f64,
    /// Also run the `(dx/2, dt/4)` refinement and check violations shrink.
    pub refine: bool,
    /// Also run with the drifts swapped, expecting detectable violations.
    pub control: bool,
    /// Minimum violation size the swapped control must exhibit; defaults to
    /// the ordering tolerance itself.
    pub control_min_violation: Option<f64>,
}

impl Default for ComparisonSection {
    fn default() -> Self {
        Self {
            tolerance_cells: tolerances::ORDERING_TOLERANCE_CELLS,
            refine: true,
            control: true,
            control_min_violation: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderSection {
    /// Lower mollification levels `n`, strictly increasing.
    pub levels: Vec<u32>,
    /// Upper level `k` shared by all runs.
    pub k: u32,
    pub table_spacing: f64,
    pub tolerance_cells: f64,
    pub ordered_fraction: f64,
    pub contraction_fraction: f64,
}

impl Default for LadderSection {
    fn default() -> Self {
        Self {
            levels: vec![4, 8, 12, 16],
            k: 20,
            table_spacing: 1e-3,
            tolerance_cells: tolerances::ORDERING_TOLERANCE_CELLS,
            ordered_fraction: tolerances::ORDERED_SEED_FRACTION,
            contraction_fraction: tolerances::CONTRACTION_SEED_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsSection {
    /// Weight exponent of the tracked functional.
    pub lambda: f64,
    /// Moment power.
    pub p: f64,
    /// Physical spacing between recorded times (keeps the sup sampling
    /// comparable across refinements).
    pub record_spacing: f64,
    pub tolerance_rel: f64,
    /// Run the `(dx/2, dt/4)` refinement variant.
    pub refine: bool,
    /// Run the doubled-domain variant.
    pub widen: bool,
    /// Check the unweighted control moment grows with the domain.
    pub unweighted_control: bool,
    pub control_growth_min: f64,
}

impl Default for MomentsSection {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            p: 2.0,
            record_spacing: 5e-3,
            tolerance_rel: tolerances::MOMENT_STABILITY_REL,
            refine: true,
            widen: true,
            unweighted_control: true,
            control_growth_min: tolerances::MOMENT_CONTROL_GROWTH_MIN,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderSection {
    pub time_window: [f64; 2],
    pub space_window: [f64; 2],
}

impl Default for HolderSection {
    fn default() -> Self {
        Self {
            time_window: [tolerances::TIME_EXPONENT_WINDOW.0, tolerances::TIME_EXPONENT_WINDOW.1],
            space_window: [tolerances::SPACE_EXPONENT_WINDOW.0, tolerances::SPACE_EXPONENT_WINDOW.1],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GirsanovSection {
    /// Constant level of the exponential tilt.
    pub z_constant: f64,
    /// Quadratic-variation thresholds for the stopping-time sweep.
    pub thresholds: Vec<f64>,
}

impl Default for GirsanovSection {
    fn default() -> Self {
        Self { z_constant: 0.1, thresholds: vec![0.02, 0.04, 0.06, 0.08] }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelAuditSection {
    pub pointwise_n_t: usize,
    pub pointwise_n_x: usize,
    pub weighted_n: usize,
    pub lambda: f64,
    pub stability_rel: f64,
    /// Re-run each sweep at doubled resolution and compare worst ratios.
    pub refine: bool,
}

impl Default for KernelAuditSection {
    fn default() -> Self {
        Self {
            pointwise_n_t: 50,
            pointwise_n_x: 50,
            weighted_n: 20,
            lambda: 1.0,
            stability_rel: tolerances::AUDIT_STABILITY_REL,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DumpSection {
    /// Write the first seed's trajectory next to the report.
    pub trajectories: bool,
    /// Write the first seed's noise sheet next to the report.
    pub noise: bool,
    /// `csv` or `binary` (trajectories only; the noise dump is CSV).
    pub format: String,
}

impl Default for DumpSection {
    fn default() -> Self {
        Self { trajectories: false, noise: false, format: "csv".into() }
    }
}

impl ExperimentConfig {
    pub fn lattice(&self) -> CliResult<Lattice> {
        self.lattice
            .as_ref()
            .ok_or_else(|| CliError::Config("this experiment needs a [lattice] section".into()))?
            .build()
    }
}

pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
}

/// Builds a coefficient from its registry label, reporting failures as
/// configuration errors.
pub fn coefficient(label: &str) -> CliResult<Coefficient> {
    from_label(label).map_err(|e| CliError::Config(format!("bad coefficient label {label:?}: {e}")))
}

/// Initial-condition registry: `zero`, `const:c`, `linear:a` (slope `a`),
/// `gaussian:s` (unit peak, width `s`), `bump:w` (smooth, supported on
/// `|x| < w`).
pub fn initial_field(label: &str, lattice: &Lattice) -> CliResult<Field> {
    let bad = |m: String| CliError::Config(m);
    let parse = |v: &str, what: &str| -> CliResult<f64> {
        v.parse::<f64>()
            .map_err(|_| bad(format!("initial condition {label:?}: cannot parse {what} {v:?}")))
    };
    let field = if label == "zero" {
        Field::constant(lattice.clone(), 0.0)
    } else if let Some(v) = label.strip_prefix("const:") {
        Field::constant(lattice.clone(), parse(v, "level")?)
    } else if let Some(v) = label.strip_prefix("linear:") {
        let a = parse(v, "slope")?;
        Field::from_fn(lattice.clone(), |x| a * x)
    } else if let Some(v) = label.strip_prefix("gaussian:") {
        let s = parse(v, "width")?;
        if !(s > 0.0) {
            return Err(bad(format!("initial condition {label:?}: width must be positive")));
        }
        Field::from_fn(lattice.clone(), |x| (-x * x / (2.0 * s * s)).exp())
    } else if let Some(v) = label.strip_prefix("bump:") {
        let w = parse(v, "width")?;
        if !(w > 0.0) {
            return Err(bad(format!("initial condition {label:?}: width must be positive")));
        }
        Field::from_fn(lattice.clone(), move |x| {
            let r = x / w;
            if r.abs() < 1.0 { (-1.0 / (1.0 - r * r)).exp() } else { 0.0 }
        })
    } else {
        return Err(bad(format!("unknown initial condition label {label:?}")));
    };
    field.map_err(|e| bad(format!("initial condition {label:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config_roundtrip() {
        let text = r#"
            [lattice]
            half_width = 10.0
            dx = 0.1
            dt = 0.004
            horizon = 1.0
            boundary = "dirichlet_zero"

            [coefficients]
            sigma = "linear:1"
            drift_lower = "zero"
            drift_upper = "const:1"
            u0 = "const:1"

            [run]
            seeds = 7

            [comparison]
            tolerance_cells = 8.0
        "#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.run.seeds, 7);
        assert_eq!(cfg.comparison.tolerance_cells, 8.0);
        assert!(cfg.comparison.refine);
        let lat = cfg.lattice().unwrap();
        assert_eq!(lat.n_space(), 201);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[run]\nseeds = 3\nbananas = 1\n";
        assert!(toml::from_str::<ExperimentConfig>(text).is_err());
    }

    #[test]
    fn initial_field_registry() {
        let lat = build_lattice(2.0, 0.1, 0.004, 0.1, Boundary::DirichletZero).unwrap();
        assert_eq!(initial_field("zero", &lat).unwrap().values()[0], 0.0);
        assert_eq!(initial_field("const:2.5", &lat).unwrap().values()[0], 2.5);
        let lin = initial_field("linear:2", &lat).unwrap();
        assert_eq!(lin.values()[0], -4.0);
        let g = initial_field("gaussian:0.5", &lat).unwrap();
        assert_eq!(g.values()[20], 1.0);
        let b = initial_field("bump:1", &lat).unwrap();
        assert_eq!(b.values()[0], 0.0);
        assert!(b.values()[20] > 0.3);
        assert!(initial_field("wiggle:1", &lat).is_err());
        assert!(initial_field("gaussian:-1", &lat).is_err());
    }

    #[test]
    fn missing_lattice_is_a_config_error() {
        let cfg: ExperimentConfig = toml::from_str("").unwrap();
        assert!(matches!(cfg.lattice(), Err(CliError::Config(_))));
    }
}
