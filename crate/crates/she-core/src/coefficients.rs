//! Coefficient families, smooth cutoffs, and the mollified drift ladder.
//!
//! A [`Coefficient`] is a function `(t, x, u) -> R` together with the
//! regularity metadata the well-posedness conditions refer to: a linear
//! growth constant `C` with `|f| <= C (1 + |u|)`, a Holder index `gamma` for
//! the noise coefficient (admissible range `(3/4, 1]`), and a Lipschitz
//! constant for drifts. Named coefficients come from a small registry of
//! string labels so configurations can be echoed into reports verbatim.
//!
//! The drift ladder approximates a merely continuous drift `b(u)` from above
//! by smooth bounded functions:
//!
//! ```text
//!   b_m(u)      = int b(u') G_{2^{-m}}(u - u') Psi_m(u') du',
//!   b~_{n,k}(u) = min_{n <= m <= k} b_m(u),
//! ```
//!
//! where `Psi_m` is a plateau cutoff equal to 1 on `[-m, m]` and vanishing
//! beyond `|u| = m + 2`. The minimum makes the family non-decreasing in `n`
//! pointwise, which is what drives the monotone solution ladder downstream.
//! Evaluations are served from per-`m` lookup tables built once per ladder
//! and shared by concurrent readers.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::gl16;
use crate::rng::SplitMix64;

// ── Coefficient type and registry ────────────────────────────────────────

/// Regularity metadata attached to a coefficient. `None` means "not
/// declared", not "fails the condition".
#[derive(Debug, Clone, Default, Serialize)]
pub struct CoefficientMeta {
    /// `C` such that `|f(t, x, u)| <= C (1 + |u|)`.
    pub growth_constant: Option<f64>,
    /// Holder index in `u`; declared only inside the admissible `(3/4, 1]`.
    pub holder_index: Option<f64>,
    /// `B` such that `|f(t, x, u) - f(t, x, u')| <= B |u - u'|`.
    pub lipschitz_constant: Option<f64>,
    /// True when the value ignores `(t, x)`; required by table-backed code.
    pub depends_only_on_u: bool,
}

/// A coefficient of the equation: noise amplitude, drift, or weight field.
#[derive(Clone)]
pub struct Coefficient {
    label: String,
    eval: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    meta: CoefficientMeta,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficient").field("label", &self.label).field("meta", &self.meta).finish()
    }
}

impl Coefficient {
    pub fn new(label: impl Into<String>, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), eval: Arc::new(f), meta: CoefficientMeta::default() }
    }

    /// Coefficient depending on the solution value only.
    pub fn from_u_fn(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let mut c = Self::new(label, move |_, _, u| f(u));
        c.meta.depends_only_on_u = true;
        c
    }

    #[inline]
    pub fn eval(&self, t: f64, x: f64, u: f64) -> f64 {
        (self.eval)(t, x, u)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn meta(&self) -> &CoefficientMeta {
        &self.meta
    }

    pub fn with_growth(mut self, c: f64) -> Self {
        self.meta.growth_constant = Some(c);
        self
    }

    /// Declares the Holder index; only the admissible window is accepted.
    pub fn with_holder(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.75 && gamma <= 1.0) {
            return Err(Error::ParameterOutOfRegime(format!(
                "holder index {gamma} outside (3/4, 1]"
            )));
        }
        self.meta.holder_index = Some(gamma);
        Ok(self)
    }

    pub fn with_lipschitz(mut self, b: f64) -> Self {
        self.meta.lipschitz_constant = Some(b);
        self
    }
}

/// Parses a coefficient label: one of `zero`, `const:c`, `linear:a`,
/// `power_sigma:p`, `power_drift:q`, `sqrt`, or a `+`-separated sum of
/// those. Growth and Lipschitz constants of sums add; a Holder index is only
/// carried by single atoms.
pub fn from_label(label: &str) -> Result<Coefficient> {
    let parts: Vec<&str> = label.split('+').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::InvalidParameter(format!("malformed coefficient label {label:?}")));
    }
    let atoms: Vec<Coefficient> = parts.iter().map(|p| parse_atom(p)).collect::<Result<_>>()?;
    if atoms.len() == 1 {
        return Ok(atoms.into_iter().next().unwrap());
    }

    let canonical = parts.join("+");
    let meta = CoefficientMeta {
        growth_constant: atoms.iter().map(|a| a.meta.growth_constant).sum::<Option<f64>>(),
        holder_index: None,
        lipschitz_constant: atoms.iter().map(|a| a.meta.lipschitz_constant).sum::<Option<f64>>(),
        depends_only_on_u: atoms.iter().all(|a| a.meta.depends_only_on_u),
    };
    let mut c = Coefficient::new(canonical, move |t, x, u| atoms.iter().map(|a| a.eval(t, x, u)).sum());
    c.meta = meta;
    Ok(c)
}

fn parse_atom(atom: &str) -> Result<Coefficient> {
    let (name, arg) = match atom.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (atom, None),
    };
    let num = |a: Option<&str>| -> Result<f64> {
        a.ok_or_else(|| Error::InvalidParameter(format!("label {atom:?} needs a numeric argument")))?
            .parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("bad numeric argument in label {atom:?}")))
    };
    match name {
        "zero" => Ok(Coefficient::from_u_fn("zero", |_| 0.0)
            .with_growth(0.0)
            .with_lipschitz(0.0)
            .with_holder(1.0)?),
        "const" => {
            let c = num(arg)?;
            Ok(Coefficient::from_u_fn(format!("const:{arg}", arg = arg.unwrap()), move |_| c)
                .with_growth(c.abs())
                .with_lipschitz(0.0)
                .with_holder(1.0)?)
        }
        "linear" => {
            let a = num(arg)?;
            Ok(Coefficient::from_u_fn(format!("linear:{arg}", arg = arg.unwrap()), move |u| a * u)
                .with_growth(a.abs())
                .with_lipschitz(a.abs())
                .with_holder(1.0)?)
        }
        "power_sigma" | "power_drift" => {
            let p = num(arg)?;
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::ParameterOutOfRegime(format!("power exponent {p} must be positive")));
            }
            let sign = if name == "power_drift" { -1.0 } else { 1.0 };
            let mut c = Coefficient::from_u_fn(format!("{name}:{arg}", arg = arg.unwrap()), move |u| {
                sign * u.abs().powf(p)
            });
            if p <= 1.0 {
                c = c.with_growth(1.0);
                if p > 0.75 {
                    c = c.with_holder(p)?;
                }
                if p == 1.0 {
                    c = c.with_lipschitz(1.0);
                }
            }
            Ok(c)
        }
        // Holder index 1/2 sits outside the admissible window, so none is
        // declared; the label exists for counterexample studies.
        "sqrt" => Ok(Coefficient::from_u_fn("sqrt", |u| u.abs().sqrt()).with_growth(1.0)),
        _ => Err(Error::InvalidParameter(format!("unknown coefficient label {atom:?}"))),
    }
}

// ── Cutoff and mollification ─────────────────────────────────────────────

/// Plateau cutoff `Psi_n`: 1 on `[-n, n]`, 0 beyond `|x| = n + 2`, quintic
/// smoothstep ramp in between. The ramp slope never exceeds 15/16, so
/// `|Psi_n'| <= 1` everywhere.
pub fn cutoff(n: u32, x: f64) -> f64 {
    let a = x.abs();
    let n = n as f64;
    if a <= n {
        1.0
    } else if a >= n + 2.0 {
        0.0
    } else {
        let s = (a - n) / 2.0;
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

#[inline]
fn gaussian_pdf(variance: f64, z: f64) -> f64 {
    (-z * z / (2.0 * variance)).exp() / (std::f64::consts::TAU * variance).sqrt()
}

/// Kernel half-width, in standard deviations, of all mollification windows.
const MOLLIFY_WINDOW_STDS: f64 = 8.0;
/// Relative error target of the adaptive mollification quadrature.
const MOLLIFY_REL_TOL: f64 = 1e-4;

/// Mollified coefficient value
/// `f_m(u) = int f(t, x, u') G_{2^{-m}}(u - u') Psi_m(u') du'`.
///
/// Composite Gauss-Legendre over the window `|u' - u| <= 8 * 2^{-m/2}`
/// intersected with the cutoff support, with panel boundaries pinned to the
/// integrand's structural points (`u' = 0` and the cutoff corners) so each
/// panel sees an analytic interior. Panels double until two consecutive
/// levels agree to `1e-4` relative.
pub fn mollify_drift(f: &Coefficient, m: u32, t: f64, x: f64, u: f64) -> Result<f64> {
    let std = 0.5f64.powi(m as i32).sqrt();
    let support = m as f64 + 2.0;
    let lo = (u - MOLLIFY_WINDOW_STDS * std).max(-support);
    let hi = (u + MOLLIFY_WINDOW_STDS * std).min(support);
    if lo >= hi {
        return Ok(0.0);
    }

    let mut cuts = vec![lo, hi];
    for c in [0.0, -(m as f64), m as f64, -support, support] {
        if c > lo && c < hi {
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let variance = 0.5f64.powi(m as i32);
    let integrand = |up: f64| f.eval(t, x, up) * gaussian_pdf(variance, u - up) * cutoff(m, up);

    let mut prev = composite_panels(&cuts, 4, &integrand);
    let mut estimate = f64::INFINITY;
    for total_panels in [8usize, 16, 32] {
        let curr = composite_panels(&cuts, total_panels, &integrand);
        let diff = (curr.value - prev.value).abs();
        // Absolute floor guards symmetric integrals that cancel to ~0.
        let floor = 1e-12 * curr.max_abs * (hi - lo);
        if diff <= (MOLLIFY_REL_TOL * curr.value.abs()).max(floor) {
            return Ok(curr.value);
        }
        estimate = diff / curr.value.abs().max(floor).max(f64::MIN_POSITIVE);
        prev = curr;
    }
    Err(Error::QuadratureFailure { estimate, target: MOLLIFY_REL_TOL })
}

struct PanelSum {
    value: f64,
    max_abs: f64,
}

/// Composite GL-16 over `cuts`-delimited sub-intervals, distributing about
/// `total` panels proportionally to width (at least one each).
fn composite_panels(cuts: &[f64], total: usize, f: &impl Fn(f64) -> f64) -> PanelSum {
    let width: f64 = cuts.last().unwrap() - cuts[0];
    let rule = gl16();
    let mut value = 0.0;
    let mut max_abs = 0.0f64;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n_panels = ((total as f64 * (b - a) / width).ceil() as usize).max(1);
        let h = (b - a) / n_panels as f64;
        for p in 0..n_panels {
            let (pa, pb) = (a + p as f64 * h, a + (p + 1) as f64 * h);
            let mid = 0.5 * (pa + pb);
            let half = 0.5 * (pb - pa);
            for (xi, wi) in rule.0.iter().zip(&rule.1) {
                let v = f(mid + half * xi);
                max_abs = max_abs.max(v.abs());
                value += wi * v * half;
            }
        }
    }
    PanelSum { value, max_abs }
}

// ── Mollifier ladder with cached tables ──────────────────────────────────

/// Construction parameters for [`MollifierLadder`].
#[derive(Debug, Clone)]
pub struct LadderConfig {
    /// Largest mollification level `k` the ladder will serve.
    pub k_max: u32,
    /// Lookup-table spacing in `u`.
    pub table_spacing: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self { k_max: 24, table_spacing: 1e-3 }
    }
}

/// Ladder of mollified drifts backed by per-level lookup tables.
///
/// Tables are built lazily, once per level, on a shared `u`-grid covering
/// every cutoff support; combined tables hold the pointwise minimum over a
/// level range. Lookups interpolate linearly, which preserves the pointwise
/// ordering across `n` exactly: the minimum is taken on table nodes before
/// interpolation.
/// Lazily built lookup tables keyed by mollification level(s).
type TableCache<K> = Mutex<BTreeMap<K, Arc<Vec<f64>>>>;

pub struct MollifierLadder {
    base: Coefficient,
    config: LadderConfig,
    u_min: f64,
    n_nodes: usize,
    per_level: TableCache<u32>,
    combined: TableCache<(u32, u32)>,
}

impl fmt::Debug for MollifierLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MollifierLadder")
            .field("base", &self.base.label())
            .field("config", &self.config)
            .finish()
    }
}

impl MollifierLadder {
    pub fn new(base: Coefficient, config: LadderConfig) -> Result<Self> {
        if !base.meta().depends_only_on_u {
            return Err(Error::InvalidParameter(
                "ladder tables are one-dimensional: the base coefficient must depend on u only".into(),
            ));
        }
        if config.k_max < 1 {
            return Err(Error::InvalidParameter("ladder needs k_max >= 1".into()));
        }
        if !(config.table_spacing > 0.0 && config.table_spacing.is_finite()) {
            return Err(Error::InvalidParameter("table spacing must be positive".into()));
        }
        // Widest reach of any level: cutoff support plus the kernel window.
        let reach = config.k_max as f64 + 2.0 + MOLLIFY_WINDOW_STDS * 0.5f64.sqrt();
        let half_nodes = (reach / config.table_spacing).ceil() as usize;
        Ok(Self {
            base,
            u_min: -(half_nodes as f64) * config.table_spacing,
            n_nodes: 2 * half_nodes + 1,
            config,
            per_level: Mutex::new(BTreeMap::new()),
            combined: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn base(&self) -> &Coefficient {
        &self.base
    }

    pub fn k_max(&self) -> u32 {
        self.config.k_max
    }

    fn node_u(&self, i: usize) -> f64 {
        self.u_min + i as f64 * self.config.table_spacing
    }

    fn interp(&self, table: &[f64], u: f64) -> f64 {
        let pos = (u - self.u_min) / self.config.table_spacing;
        if pos <= 0.0 || pos >= (self.n_nodes - 1) as f64 {
            // All levels vanish beyond the widest cutoff reach.
            return 0.0;
        }
        let i = pos as usize;
        let frac = pos - i as f64;
        table[i] + frac * (table[i + 1] - table[i])
    }

    /// Table of `b_m` on the shared grid.
    fn level_table(&self, m: u32) -> Result<Arc<Vec<f64>>> {
        if let Some(t) = self.per_level.lock().unwrap().get(&m) {
            return Ok(t.clone());
        }
        let table = Arc::new(self.build_level(m)?);
        self.per_level.lock().unwrap().entry(m).or_insert_with(|| table.clone());
        Ok(table)
    }

    fn build_level(&self, m: u32) -> Result<Vec<f64>> {
        let du = self.config.table_spacing;
        let std = 0.5f64.powi(m as i32).sqrt();
        let support = m as f64 + 2.0;
        let reach = support + MOLLIFY_WINDOW_STDS * std;
        let mut table = vec![0.0; self.n_nodes];

        if std / 32.0 >= du {
            // Wide kernel: direct quadrature on a coarse grid resolving the
            // kernel scale, then linear resampling onto the cache grid. The
            // interpolation error is O((std/32)^2 |b_m''|), far below the
            // quadrature target.
            let n_coarse = (2.0 * reach / (std / 32.0)).ceil() as usize + 1;
            let h = 2.0 * reach / (n_coarse - 1) as f64;
            let mut coarse = Vec::with_capacity(n_coarse);
            for i in 0..n_coarse {
                coarse.push(mollify_drift(&self.base, m, 0.0, 0.0, -reach + i as f64 * h)?);
            }
            for (i, slot) in table.iter_mut().enumerate() {
                let u = self.node_u(i);
                if u.abs() >= reach {
                    continue;
                }
                let pos = (u + reach) / h;
                let k = (pos as usize).min(n_coarse - 2);
                let frac = pos - k as f64;
                *slot = coarse[k] + frac * (coarse[k + 1] - coarse[k]);
            }
        } else {
            // Narrow kernel: discrete convolution on a refined cache grid.
            // The refinement keeps the sample spacing below std/8, so the
            // rectangle sum of the C^{0,gamma} integrand is well inside the
            // quadrature target.
            let ratio = ((MOLLIFY_WINDOW_STDS * du) / std).ceil() as usize;
            let du_f = du / ratio as f64;
            let variance = 0.5f64.powi(m as i32);
            let taps = (MOLLIFY_WINDOW_STDS * std / du_f).ceil() as i64;
            let kernel: Vec<f64> = (-taps..=taps)
                .map(|o| gaussian_pdf(variance, o as f64 * du_f) * du_f)
                .collect();

            // Fine samples of b * Psi_m over the cutoff support, zero-padded
            // by one kernel width on each side.
            let fine_origin = self.u_min;
            let k_lo = (((-support - fine_origin) / du_f).floor() as i64 - taps).max(0);
            let k_hi = ((support - fine_origin) / du_f).ceil() as i64 + taps;
            let fine: Vec<f64> = (k_lo..=k_hi)
                .map(|k| {
                    let up = fine_origin + k as f64 * du_f;
                    if up.abs() >= support {
                        0.0
                    } else {
                        self.base.eval(0.0, 0.0, up) * cutoff(m, up)
                    }
                })
                .collect();

            for (i, slot) in table.iter_mut().enumerate() {
                if self.node_u(i).abs() >= reach {
                    continue;
                }
                let fine_center = i as i64 * ratio as i64 - k_lo;
                let mut acc = 0.0;
                for (o, g) in kernel.iter().enumerate() {
                    let idx = fine_center - taps + o as i64;
                    if idx >= 0 && (idx as usize) < fine.len() {
                        acc += g * fine[idx as usize];
                    }
                }
                *slot = acc;
            }
        }
        Ok(table)
    }

    /// Pointwise minimum of levels `n..=k` on the table grid.
    fn combined_table(&self, n: u32, k: u32) -> Result<Arc<Vec<f64>>> {
        if !(1 <= n && n <= k && k <= self.config.k_max) {
            return Err(Error::InvalidParameter(format!(
                "ladder range ({n}, {k}) outside 1 <= n <= k <= {}",
                self.config.k_max
            )));
        }
        if let Some(t) = self.combined.lock().unwrap().get(&(n, k)) {
            return Ok(t.clone());
        }
        let mut min_table = self.level_table(n)?.as_ref().clone();
        for m in n + 1..=k {
            let level = self.level_table(m)?;
            for (slot, &v) in min_table.iter_mut().zip(level.iter()) {
                if v < *slot {
                    *slot = v;
                }
            }
        }
        let table = Arc::new(min_table);
        self.combined.lock().unwrap().entry((n, k)).or_insert_with(|| table.clone());
        Ok(table)
    }

    /// `b~_{n,k}(u) = min_{n <= m <= k} b_m(u)`, from the cached tables.
    pub fn ladder_eval(&self, n: u32, k: u32, u: f64) -> Result<f64> {
        Ok(self.interp(&self.combined_table(n, k)?, u))
    }

    /// Wraps one ladder rung as a coefficient for the solver. With `n == k`
    /// this is the single smoothed level `b_n`.
    pub fn cached_coefficient(&self, n: u32, k: u32) -> Result<Coefficient> {
        let table = self.combined_table(n, k)?;
        let (u_min, du, n_nodes) = (self.u_min, self.config.table_spacing, self.n_nodes);
        let label = format!("ladder({},n={n},k={k})", self.base.label());
        Ok(Coefficient::from_u_fn(label, move |u| {
            let pos = (u - u_min) / du;
            if pos <= 0.0 || pos >= (n_nodes - 1) as f64 {
                return 0.0;
            }
            let i = pos as usize;
            let frac = pos - i as f64;
            table[i] + frac * (table[i + 1] - table[i])
        }))
    }

    /// Sup distance over `|u| <= window` between the ladders stopped at
    /// `k_max` and `k_max - 4`: a proxy for how much the truncation at
    /// `k_max` still moves the minimum. The window must sit inside the
    /// support of every compared level — globally the gap never settles,
    /// because each added level extends the cutoff support outward.
    pub fn convergence_gap(&self, n: u32, window: f64) -> Result<f64> {
        if self.config.k_max < n + 4 {
            return Err(Error::InvalidParameter(format!(
                "convergence gap needs k_max >= n + 4, got n = {n}, k_max = {}",
                self.config.k_max
            )));
        }
        if !(window > 0.0 && window <= (self.config.k_max - 4) as f64 + 2.0) {
            return Err(Error::InvalidParameter(format!(
                "window {window} outside the common support of the compared ladders"
            )));
        }
        let full = self.combined_table(n, self.config.k_max)?;
        let short = self.combined_table(n, self.config.k_max - 4)?;
        let mut worst = 0.0f64;
        for i in 0..self.n_nodes {
            if self.node_u(i).abs() <= window {
                worst = worst.max((full[i] - short[i]).abs());
            }
        }
        Ok(worst)
    }
}

// ── Condition checkers ───────────────────────────────────────────────────

/// Where the condition checkers sample. Grids are deterministic; `n_random`
/// extra points are drawn from a seeded stream with log-uniform `|u|`.
#[derive(Debug, Clone)]
pub struct SamplingSpec {
    pub t_values: Vec<f64>,
    pub x_values: Vec<f64>,
    pub u_values: Vec<f64>,
    /// Pair offsets used by the modulus checkers: pairs `(u, u + delta)`.
    pub pair_offsets: Vec<f64>,
    pub n_random: usize,
    pub seed: u64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        let mut u_values = vec![0.0];
        for exp in [-6.0f64, -4.0, -2.0, -1.0, -0.3, 0.0, 0.3, 1.0, 2.0, 4.0, 6.0] {
            let v = 10.0f64.powf(exp);
            u_values.push(v);
            u_values.push(-v);
        }
        Self {
            t_values: vec![0.0, 0.5, 1.0],
            x_values: vec![-5.0, -1.0, 0.0, 1.0, 5.0],
            u_values,
            pair_offsets: vec![1e-6, 1e-4, 1e-2, 0.1, 1.0],
            n_random: 200,
            seed: 7,
        }
    }
}

impl SamplingSpec {
    fn validate(&self) -> Result<()> {
        if self.t_values.is_empty() || self.x_values.is_empty() {
            return Err(Error::EmptyInput("sampling grids must be nonempty"));
        }
        if self.u_values.is_empty() && self.n_random == 0 {
            return Err(Error::EmptyInput("no u samples requested"));
        }
        Ok(())
    }

    fn random_u(rng: &mut SplitMix64) -> f64 {
        let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        sign * 10.0f64.powf(rng.next_in(-6.0, 6.0))
    }
}

/// A sample point violating the audited inequality.
#[derive(Debug, Clone, Serialize)]
pub struct CheckViolation {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub u_prime: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of a condition check: `pass` iff no sampled ratio exceeds 1
/// (within floating-point slack); `worst_ratio` is the empirical constant.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    pub worst_ratio: f64,
    pub n_checked: usize,
    pub first_violation: Option<CheckViolation>,
}

/// Slack applied to sampled ratios: power-law cases sit exactly on the
/// bound, where roundoff can tip either way.
const CHECK_SLACK: f64 = 1e-9;

struct CheckAccumulator {
    worst_ratio: f64,
    n_checked: usize,
    first_violation: Option<CheckViolation>,
}

impl CheckAccumulator {
    fn new() -> Self {
        Self { worst_ratio: 0.0, n_checked: 0, first_violation: None }
    }

    fn record(&mut self, ratio: f64, witness: impl FnOnce() -> CheckViolation) {
        self.n_checked += 1;
        if ratio > self.worst_ratio {
            self.worst_ratio = ratio;
        }
        if ratio > 1.0 + CHECK_SLACK && self.first_violation.is_none() {
            self.first_violation = Some(witness());
        }
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            pass: self.first_violation.is_none(),
            worst_ratio: self.worst_ratio,
            n_checked: self.n_checked,
            first_violation: self.first_violation,
        }
    }
}

/// Audits the linear growth condition `|f(t, x, u)| <= big_c (1 + |u|)` over
/// `t` in `[0, horizon]`.
pub fn check_growth(f: &Coefficient, horizon: f64, big_c: f64, samples: &SamplingSpec) -> Result<CheckReport> {
    if !(big_c > 0.0 && big_c.is_finite()) {
        return Err(Error::InvalidParameter(format!("growth constant must be positive, got {big_c}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    samples.validate()?;

    let mut acc = CheckAccumulator::new();
    let mut probe = |t: f64, x: f64, u: f64| {
        let lhs = f.eval(t, x, u).abs();
        let rhs = big_c * (1.0 + u.abs());
        acc.record(lhs / rhs, || CheckViolation { t, x, u, u_prime: None, lhs, rhs });
    };
    for &t in samples.t_values.iter().filter(|&&t| t <= horizon) {
        for &x in &samples.x_values {
            for &u in &samples.u_values {
                probe(t, x, u);
            }
        }
    }
    let mut rng = SplitMix64::new(samples.seed);
    for _ in 0..samples.n_random {
        let t = rng.next_in(0.0, horizon);
        let x = rng.next_in(-8.0, 8.0);
        let u = SamplingSpec::random_u(&mut rng);
        probe(t, x, u);
    }
    Ok(acc.finish())
}

/// Audits the Holder modulus
/// `|f(t,x,u) - f(t,x,u')| <= prefactor * e^{tilt |x|} (1 + |u| + |u'|)^degree |u - u'|^gamma`.
pub fn check_holder_sigma(
    f: &Coefficient,
    gamma: f64,
    prefactor: f64,
    tilt: f64,
    degree: f64,
    samples: &SamplingSpec,
) -> Result<CheckReport> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!("holder exponent {gamma} outside (0, 1]")));
    }
    if !(prefactor > 0.0 && prefactor.is_finite()) || !tilt.is_finite() || !(degree >= 0.0) {
        return Err(Error::InvalidParameter("bad modulus parameters".into()));
    }
    samples.validate()?;

    let mut acc = CheckAccumulator::new();
    let mut probe = |t: f64, x: f64, u: f64, up: f64| {
        if u == up {
            return;
        }
        let lhs = (f.eval(t, x, u) - f.eval(t, x, up)).abs();
        let rhs = prefactor
            * (tilt * x.abs()).exp()
            * (1.0 + u.abs() + up.abs()).powf(degree)
            * (u - up).abs().powf(gamma);
        acc.record(lhs / rhs, || CheckViolation { t, x, u, u_prime: Some(up), lhs, rhs });
    };
    for &t in &samples.t_values {
        for &x in &samples.x_values {
            for &u in &samples.u_values {
                for &up in &samples.u_values {
                    probe(t, x, u, up);
                }
                for &d in &samples.pair_offsets {
                    probe(t, x, u, u + d);
                }
            }
        }
    }
    let mut rng = SplitMix64::new(samples.seed);
    for _ in 0..samples.n_random {
        let t = rng.next_in(0.0, 1.0);
        let x = rng.next_in(-8.0, 8.0);
        let u = SamplingSpec::random_u(&mut rng);
        let d = SamplingSpec::random_u(&mut rng);
        probe(t, x, u, u + d);
    }
    if acc.n_checked == 0 {
        return Err(Error::EmptyInput("no distinct sample pairs"));
    }
    Ok(acc.finish())
}

/// Audits the Lipschitz condition `|f(t,x,u) - f(t,x,u')| <= big_b |u - u'|`.
pub fn check_lipschitz(f: &Coefficient, big_b: f64, samples: &SamplingSpec) -> Result<CheckReport> {
    if !(big_b > 0.0 && big_b.is_finite()) {
        return Err(Error::InvalidParameter(format!("Lipschitz constant must be positive, got {big_b}")));
    }
    samples.validate()?;

    let mut acc = CheckAccumulator::new();
    let mut probe = |t: f64, x: f64, u: f64, up: f64| {
        if u == up {
            return;
        }
        let lhs = (f.eval(t, x, u) - f.eval(t, x, up)).abs();
        let rhs = big_b * (u - up).abs();
        acc.record(lhs / rhs, || CheckViolation { t, x, u, u_prime: Some(up), lhs, rhs });
    };
    for &t in &samples.t_values {
        for &x in &samples.x_values {
            for &u in &samples.u_values {
                for &up in &samples.u_values {
                    probe(t, x, u, up);
                }
                for &d in &samples.pair_offsets {
                    probe(t, x, u, u + d);
                }
            }
        }
    }
    let mut rng = SplitMix64::new(samples.seed);
    for _ in 0..samples.n_random {
        let t = rng.next_in(0.0, 1.0);
        let x = rng.next_in(-8.0, 8.0);
        let u = SamplingSpec::random_u(&mut rng);
        let d = SamplingSpec::random_u(&mut rng);
        probe(t, x, u, u + d);
    }
    if acc.n_checked == 0 {
        return Err(Error::EmptyInput("no distinct sample pairs"));
    }
    Ok(acc.finish())
}

// ── Power-law pair ───────────────────────────────────────────────────────

/// Matched power-law coefficients with their drift-to-noise ratio.
#[derive(Debug, Clone)]
pub struct PowerLawPair {
    pub sigma: Coefficient,
    pub drift: Coefficient,
    /// `Z = |u|^{q-p}`, satisfying `drift = -Z * sigma` in closed form.
    pub z: Coefficient,
}

/// Builds `sigma = |u|^p`, `drift = -|u|^q` with the ratio `Z = |u|^{q-p}`,
/// requiring the admissible regime `3/4 < p < q <= 1`.
pub fn power_law_pair(p: f64, q: f64) -> Result<PowerLawPair> {
    if !(p > 0.75 && p < q && q <= 1.0) {
        return Err(Error::ParameterOutOfRegime(format!(
            "power pair needs 3/4 < p < q <= 1, got p = {p}, q = {q}"
        )));
    }
    let sigma = from_label(&format!("power_sigma:{p}"))?;
    let drift = from_label(&format!("power_drift:{q}"))?;
    let r = q - p;
    let z = Coefficient::from_u_fn(format!("power_z:{r}"), move |u| u.abs().powf(r));
    Ok(PowerLawPair { sigma, drift, z })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_labels_evaluate() {
        assert_eq!(from_label("zero").unwrap().eval(0.0, 0.0, 3.0), 0.0);
        assert_eq!(from_label("const:2.5").unwrap().eval(0.0, 0.0, -7.0), 2.5);
        assert_eq!(from_label("linear:-3").unwrap().eval(0.0, 0.0, 2.0), -6.0);
        let s = from_label("power_sigma:0.8").unwrap();
        assert!((s.eval(0.0, 0.0, 2.0) - 1.7411011265922482).abs() < 1e-15);
        assert_eq!(s.meta().holder_index, Some(0.8));
        assert_eq!(from_label("power_drift:1").unwrap().eval(0.0, 0.0, 2.0), -2.0);
        assert_eq!(from_label("sqrt").unwrap().eval(0.0, 0.0, 4.0), 2.0);
        let sum = from_label("power_drift:0.95+const:0.5").unwrap();
        assert!((sum.eval(0.0, 0.0, 2.0) - (0.5 - 2.0f64.powf(0.95))).abs() < 1e-15);
        assert!(sum.meta().depends_only_on_u);
    }

    #[test]
    fn registry_rejects_bad_labels() {
        assert!(matches!(from_label("cubic"), Err(Error::InvalidParameter(_))));
        assert!(matches!(from_label("const:abc"), Err(Error::InvalidParameter(_))));
        assert!(matches!(from_label("power_sigma:-1"), Err(Error::ParameterOutOfRegime(_))));
        assert!(matches!(from_label("zero++const:1"), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn sqrt_declares_no_holder_index() {
        assert_eq!(from_label("sqrt").unwrap().meta().holder_index, None);
    }

    #[test]
    fn cutoff_plateau_ramp_and_slope() {
        assert_eq!(cutoff(3, 2.5), 1.0);
        assert_eq!(cutoff(3, -3.0), 1.0);
        assert_eq!(cutoff(3, -6.0), 0.0);
        assert_eq!(cutoff(3, 5.0), 0.0);
        assert!((cutoff(3, 4.0) - 0.5).abs() < 1e-15);
        assert!((cutoff(3, -4.0) - 0.5).abs() < 1e-15);
        // Steepest slope is 15/16, attained mid-ramp.
        let h = 1e-3;
        let mut max_slope = 0.0f64;
        for k in 0..6000 {
            let x = k as f64 * h;
            max_slope = max_slope.max((cutoff(3, x + h) - cutoff(3, x)).abs() / h);
        }
        assert!(max_slope <= 1.0, "slope {max_slope}");
        assert!((max_slope - 15.0 / 16.0).abs() < 1e-3, "slope {max_slope}");
    }

    #[test]
    fn mollified_constant_recovers_kernel_mass() {
        // Psi_8 = 1 across the whole +-8 std window at u = 0, so the value
        // is the Gaussian mass of the window.
        let one = from_label("const:1").unwrap();
        let v = mollify_drift(&one, 8, 0.0, 0.0, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "mass {v}");
    }

    #[test]
    fn mollify_matches_dense_oracle() {
        // Oracle: same integrand, brute-force composite GL with 64x the
        // panels and no adaptivity.
        let b = from_label("power_drift:0.9").unwrap();
        for m in [4u32, 8] {
            let std = 0.5f64.powi(m as i32).sqrt();
            let variance = std * std;
            for u in [0.0, 0.3, 1.0, 2.7, -1.5] {
                let got = mollify_drift(&b, m, 0.0, 0.0, u).unwrap();
                let lo = (u - 8.0 * std).max(-(m as f64 + 2.0));
                let hi = (u + 8.0 * std).min(m as f64 + 2.0);
                let cuts: Vec<f64> = {
                    let mut c = vec![lo, hi];
                    if lo < 0.0 && hi > 0.0 {
                        c.push(0.0);
                    }
                    c.sort_by(f64::total_cmp);
                    c
                };
                let oracle = composite_panels(&cuts, 512, &|up: f64| {
                    b.eval(0.0, 0.0, up) * gaussian_pdf(variance, u - up) * cutoff(m, up)
                })
                .value;
                assert!(
                    (got - oracle).abs() <= 1e-4 * oracle.abs().max(1e-3),
                    "m={m} u={u}: got {got}, oracle {oracle}"
                );
            }
        }
    }

    #[test]
    fn mollified_drift_stays_negative_and_bounded() {
        let b = from_label("power_drift:0.9").unwrap();
        let bound = 10.0f64.powf(0.9); // sup |b| on the cutoff support of m = 8
        for k in -30..=30 {
            let u = k as f64 * 0.4;
            let v = mollify_drift(&b, 8, 0.0, 0.0, u).unwrap();
            assert!(v <= 0.0, "b_8({u}) = {v} > 0");
            assert!(v >= -bound, "b_8({u}) = {v} below -{bound}");
        }
    }

    #[test]
    fn ladder_tables_match_direct_quadrature() {
        let ladder = MollifierLadder::new(
            from_label("power_drift:0.9").unwrap(),
            LadderConfig { k_max: 12, table_spacing: 1e-3 },
        )
        .unwrap();
        let b = from_label("power_drift:0.9").unwrap();
        for u in [0.0, 0.17, -0.9, 2.3, -5.5] {
            let table_route = ladder.ladder_eval(4, 12, u).unwrap();
            let mut direct = f64::INFINITY;
            for m in 4..=12 {
                direct = direct.min(mollify_drift(&b, m, 0.0, 0.0, u).unwrap());
            }
            assert!(
                (table_route - direct).abs() < 1e-3,
                "u = {u}: table {table_route}, direct {direct}"
            );
        }
    }

    #[test]
    fn ladder_is_monotone_in_lower_level() {
        let ladder = MollifierLadder::new(
            from_label("power_drift:0.9").unwrap(),
            LadderConfig { k_max: 12, table_spacing: 1e-3 },
        )
        .unwrap();
        let mut rng = SplitMix64::new(3);
        for _ in 0..200 {
            let u = rng.next_in(-7.0, 7.0);
            let low = ladder.ladder_eval(2, 12, u).unwrap();
            let mid = ladder.ladder_eval(4, 12, u).unwrap();
            let high = ladder.ladder_eval(8, 12, u).unwrap();
            // Smaller n minimizes over more levels: exact pointwise order.
            assert!(low <= mid && mid <= high, "u = {u}: {low} / {mid} / {high}");
        }
    }

    #[test]
    fn ladder_minimum_settles_as_k_grows() {
        let ladder = MollifierLadder::new(
            from_label("power_drift:0.9").unwrap(),
            LadderConfig { k_max: 14, table_spacing: 1e-3 },
        )
        .unwrap();
        // Compare on |u| <= 4, inside the support of every level involved.
        let sup_gap = |k1: u32, k2: u32| -> f64 {
            let a = ladder.combined_table(4, k1).unwrap();
            let b = ladder.combined_table(4, k2).unwrap();
            let mut worst = 0.0f64;
            for i in 0..a.len() {
                if ladder.node_u(i).abs() <= 4.0 {
                    worst = worst.max((a[i] - b[i]).abs());
                }
            }
            worst
        };
        let early = sup_gap(8, 6);
        let late = sup_gap(14, 12);
        assert!(late < early, "gaps not settling: {early} then {late}");
        assert!(ladder.convergence_gap(4, 6.0).unwrap() < 0.05);
    }

    #[test]
    fn ladder_rejects_bad_ranges_and_bases() {
        let ladder = MollifierLadder::new(
            from_label("power_drift:0.9").unwrap(),
            LadderConfig { k_max: 8, table_spacing: 1e-3 },
        )
        .unwrap();
        assert!(ladder.ladder_eval(0, 8, 0.0).is_err());
        assert!(ladder.ladder_eval(4, 9, 0.0).is_err());
        assert!(ladder.ladder_eval(6, 4, 0.0).is_err());
        let txu = Coefficient::new("txu", |t, _, u| t * u);
        assert!(MollifierLadder::new(txu, LadderConfig::default()).is_err());
    }

    #[test]
    fn growth_check_passes_linear_and_catches_quadratic() {
        let samples = SamplingSpec::default();
        let ok = check_growth(&from_label("linear:1").unwrap(), 1.0, 1.0, &samples).unwrap();
        assert!(ok.pass, "worst {}", ok.worst_ratio);
        assert!(ok.worst_ratio > 0.9);

        let quad = Coefficient::from_u_fn("quadratic", |u| u * u);
        let bad = check_growth(&quad, 1.0, 1.0, &samples).unwrap();
        assert!(!bad.pass);
        let w = bad.first_violation.unwrap();
        assert!(w.lhs > w.rhs);
    }

    #[test]
    fn holder_check_separates_admissible_from_rough() {
        let samples = SamplingSpec::default();
        let ok = check_holder_sigma(&from_label("power_sigma:0.8").unwrap(), 0.8, 1.0, 0.0, 0.0, &samples).unwrap();
        assert!(ok.pass, "worst {}", ok.worst_ratio);
        // The bound is attained against u' = 0.
        assert!((ok.worst_ratio - 1.0).abs() < 1e-9);

        let bad = check_holder_sigma(&from_label("sqrt").unwrap(), 0.8, 1.0, 0.0, 0.0, &samples).unwrap();
        assert!(!bad.pass);
        assert!(bad.worst_ratio > 10.0);
    }

    #[test]
    fn lipschitz_check_separates_linear_from_sublinear() {
        let samples = SamplingSpec::default();
        let ok = check_lipschitz(&from_label("linear:2").unwrap(), 2.0, &samples).unwrap();
        assert!(ok.pass);
        let bad = check_lipschitz(&from_label("power_drift:0.95").unwrap(), 1.0, &samples).unwrap();
        assert!(!bad.pass);
    }

    #[test]
    fn checkers_reject_empty_sampling() {
        let empty = SamplingSpec { t_values: vec![], ..SamplingSpec::default() };
        assert!(matches!(
            check_growth(&from_label("zero").unwrap(), 1.0, 1.0, &empty),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn power_pair_identity_and_regime() {
        let pair = power_law_pair(0.8, 1.0).unwrap();
        assert!((pair.sigma.eval(0.0, 0.0, 2.0) - 1.7411011265922482).abs() < 1e-15);
        assert_eq!(pair.drift.eval(0.0, 0.0, 2.0), -2.0);
        assert!((pair.z.eval(0.0, 0.0, 2.0) - 1.148698354997035).abs() < 1e-15);
        // drift = -z * sigma as floating-point closed forms.
        for u in [0.0, 0.01, 0.7, 2.0, -3.3, 100.0] {
            let direct = pair.drift.eval(0.0, 0.0, u);
            let recomposed = -pair.z.eval(0.0, 0.0, u) * pair.sigma.eval(0.0, 0.0, u);
            assert!((direct - recomposed).abs() <= 4e-16 * direct.abs(), "u = {u}");
        }

        assert!(matches!(power_law_pair(0.7, 0.9), Err(Error::ParameterOutOfRegime(_))));
        assert!(matches!(power_law_pair(0.8, 0.8), Err(Error::ParameterOutOfRegime(_))));
        assert!(matches!(power_law_pair(0.9, 1.1), Err(Error::ParameterOutOfRegime(_))));
    }
}
