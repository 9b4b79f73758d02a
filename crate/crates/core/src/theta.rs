//! Gauge functions `θ : [0, ∞) → [0, 1]` and the scalar kernels built from
//! them.
//!
//! A gauge compresses a seminorm value into a bounded summand of the metric.
//! Besides evaluation, every gauge carries a growth certificate: an exponent
//! `α` with `θ(t) ≤ C₀ t^α` below a threshold `m` and `1 − θ(t) ≤ C₁ t^{−α}`
//! above a threshold `M`. The certificate drives every analytic tail bound
//! used by the quadratures in this module.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{
    dyadic_breaks, merge_breaks, uniform_breaks, Estimate, Integrator, QuadratureError,
    QuadratureSpec,
};

/// Tolerance used when certifying subadditivity on sampled pairs.
pub const SUBADDITIVITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error("unknown gauge `{0}`")]
    UnknownGauge(String),
    #[error("gauge exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("|Im z| = {imag} is outside the certified strip |Im z| < {limit}")]
    StripViolation { imag: f64, limit: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Shape of a gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeKind {
    /// `min(1, t)`.
    Clip,
    /// `t^α / (1 + t^α)`.
    Rational { alpha: f64 },
    /// `1 − e^{−t}`.
    Exp,
    /// `min(1, t^p)`. Subadditive only for `p ≤ 1`; `p = 2` is the standard
    /// counterexample.
    ClippedPower { power: f64 },
}

/// Serializable description of a gauge and its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeRecord {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    pub alpha: f64,
    pub small_threshold: f64,
    pub large_threshold: f64,
    pub small_constant: f64,
    pub large_constant: f64,
}

/// A gauge together with its growth certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGauge {
    kind: GaugeKind,
    growth_exponent: f64,
    small_threshold: f64,
    large_threshold: f64,
    small_constant: f64,
    large_constant: f64,
    kinks: Vec<f64>,
}

impl ThetaGauge {
    pub fn clip() -> Self {
        Self {
            kind: GaugeKind::Clip,
            growth_exponent: 1.0,
            small_threshold: 1.0,
            large_threshold: 1.0,
            small_constant: 1.0,
            large_constant: 1.0,
            kinks: vec![1.0],
        }
    }

    pub fn rational(alpha: f64) -> Result<Self, ThetaError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ThetaError::NonPositiveExponent(alpha));
        }
        // t^α/(1+t^α) ≤ t^α for t < 1 and 1/(1+t^α) ≤ t^{−α} for t > 1.
        Ok(Self {
            kind: GaugeKind::Rational { alpha },
            growth_exponent: alpha,
            small_threshold: 1.0,
            large_threshold: 1.0,
            small_constant: 1.0,
            large_constant: 1.0,
            kinks: Vec::new(),
        })
    }

    /// `1 − e^{−t}` certified with exponent 1/2 at both ends.
    pub fn exp() -> Self {
        let alpha = 0.5;
        let small_constant = 1.0;
        let small_threshold = bisect_threshold(
            |t| -(-t).exp_m1() <= small_constant * t.powf(alpha),
            1e-8,
            1.0,
        );
        Self {
            kind: GaugeKind::Exp,
            growth_exponent: alpha,
            small_threshold,
            large_threshold: 1.0,
            small_constant,
            large_constant: 1.0,
            kinks: Vec::new(),
        }
    }

    pub fn clipped_power(power: f64) -> Result<Self, ThetaError> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(ThetaError::NonPositiveExponent(power));
        }
        Ok(Self {
            kind: GaugeKind::ClippedPower { power },
            growth_exponent: power,
            small_threshold: 1.0,
            large_threshold: 1.0,
            small_constant: 1.0,
            large_constant: 1.0,
            kinks: vec![1.0],
        })
    }

    /// Builds a builtin gauge by name: `clip`, `rational` (needs `alpha`),
    /// `exp`, or `clipped_power` (needs `alpha` as the power).
    pub fn builtin(name: &str, alpha: Option<f64>) -> Result<Self, ThetaError> {
        let need = |a: Option<f64>| a.ok_or_else(|| ThetaError::NonPositiveExponent(f64::NAN));
        match name {
            "clip" => Ok(Self::clip()),
            "exp" => Ok(Self::exp()),
            "rational" => Self::rational(need(alpha)?),
            "clipped_power" | "clipped-power" => Self::clipped_power(need(alpha)?),
            other => Err(ThetaError::UnknownGauge(other.to_string())),
        }
    }

    /// Parses `clip`, `exp`, `rational:2`, `rational(2)` or
    /// `clipped_power:2`.
    pub fn parse(spec: &str) -> Result<Self, ThetaError> {
        let spec = spec.trim();
        let (name, arg) = if let Some((n, a)) = spec.split_once(':') {
            (n, Some(a))
        } else if let Some(open) = spec.find('(') {
            let inner = spec[open + 1..].trim_end_matches(')');
            (&spec[..open], Some(inner))
        } else {
            (spec, None)
        };
        let alpha = match arg {
            Some(a) => Some(
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| ThetaError::InvalidArgument(format!("bad exponent `{a}`")))?,
            ),
            None => None,
        };
        Self::builtin(name.trim(), alpha)
    }

    /// The three gauges of the standard example family.
    pub fn builtins() -> Vec<Self> {
        vec![
            Self::clip(),
            Self::rational(1.0).expect("positive exponent"),
            Self::exp(),
        ]
    }

    pub fn kind(&self) -> GaugeKind {
        self.kind
    }

    pub fn name(&self) -> String {
        match self.kind {
            GaugeKind::Clip => "clip".into(),
            GaugeKind::Exp => "exp".into(),
            GaugeKind::Rational { alpha } => format!("rational({alpha})"),
            GaugeKind::ClippedPower { power } => format!("clipped_power({power})"),
        }
    }

    pub fn growth_exponent(&self) -> f64 {
        self.growth_exponent
    }

    pub fn small_threshold(&self) -> f64 {
        self.small_threshold
    }

    pub fn large_threshold(&self) -> f64 {
        self.large_threshold
    }

    pub fn small_constant(&self) -> f64 {
        self.small_constant
    }

    pub fn large_constant(&self) -> f64 {
        self.large_constant
    }

    /// Points where the derivative is undefined.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn record(&self) -> GaugeRecord {
        let (name, parameter) = match self.kind {
            GaugeKind::Clip => ("clip", None),
            GaugeKind::Exp => ("exp", None),
            GaugeKind::Rational { alpha } => ("rational", Some(alpha)),
            GaugeKind::ClippedPower { power } => ("clipped_power", Some(power)),
        };
        GaugeRecord {
            name: name.into(),
            parameter,
            alpha: self.growth_exponent,
            small_threshold: self.small_threshold,
            large_threshold: self.large_threshold,
            small_constant: self.small_constant,
            large_constant: self.large_constant,
        }
    }

    /// Rebuilds a gauge from a record. The declared certificate replaces the
    /// builtin one, so a record can carry constants that later fail
    /// [`check_admissibility`].
    pub fn from_record(rec: &GaugeRecord) -> Result<Self, ThetaError> {
        let mut g = Self::builtin(&rec.name, rec.parameter)?;
        for (what, v) in [
            ("alpha", rec.alpha),
            ("small_threshold", rec.small_threshold),
            ("large_threshold", rec.large_threshold),
            ("small_constant", rec.small_constant),
            ("large_constant", rec.large_constant),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ThetaError::InvalidArgument(format!(
                    "{what} must be positive and finite, got {v}"
                )));
            }
        }
        g.growth_exponent = rec.alpha;
        g.small_threshold = rec.small_threshold;
        g.large_threshold = rec.large_threshold;
        g.small_constant = rec.small_constant;
        g.large_constant = rec.large_constant;
        Ok(g)
    }

    /// `θ(t)`; negative arguments are clamped to zero.
    pub fn value(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self.kind {
            GaugeKind::Clip => t.min(1.0),
            GaugeKind::Rational { alpha } => {
                if t <= 1.0 {
                    let p = t.powf(alpha);
                    p / (1.0 + p)
                } else {
                    1.0 / (1.0 + t.powf(-alpha))
                }
            }
            GaugeKind::Exp => -(-t).exp_m1(),
            GaugeKind::ClippedPower { power } => t.powf(power).min(1.0),
        }
    }

    /// `1 − θ(t)`, evaluated without cancellation for large `t`.
    pub fn complement(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self.kind {
            GaugeKind::Clip => (1.0 - t).max(0.0),
            GaugeKind::Rational { alpha } => {
                if t <= 1.0 {
                    1.0 / (1.0 + t.powf(alpha))
                } else {
                    let q = t.powf(-alpha);
                    q / (1.0 + q)
                }
            }
            GaugeKind::Exp => (-t).exp(),
            GaugeKind::ClippedPower { power } => (1.0 - t.powf(power)).max(0.0),
        }
    }

    /// `θ'(t)`; `None` at kink points.
    pub fn derivative(&self, t: f64) -> Option<f64> {
        if self.kinks.contains(&t) {
            return None;
        }
        let t = t.max(0.0);
        Some(match self.kind {
            GaugeKind::Clip => {
                if t < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            GaugeKind::Rational { alpha } => {
                if t == 0.0 {
                    match alpha.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0,
                        _ => 0.0,
                    }
                } else if t <= 1.0 {
                    let p = t.powf(alpha);
                    alpha * p / (t * (1.0 + p) * (1.0 + p))
                } else {
                    let q = t.powf(-alpha);
                    alpha * q / (t * (1.0 + q) * (1.0 + q))
                }
            }
            GaugeKind::Exp => (-t).exp(),
            GaugeKind::ClippedPower { power } => {
                if t < 1.0 {
                    power * t.powf(power - 1.0)
                } else {
                    0.0
                }
            }
        })
    }

    /// `F(w) = θ(e^w)`.
    pub fn log_gauge(&self, w: f64) -> f64 {
        self.value(w.exp())
    }

    /// `1 − F(w)`.
    pub fn log_complement(&self, w: f64) -> f64 {
        self.complement(w.exp())
    }

    /// Kink locations in log coordinates.
    fn log_kinks(&self) -> Vec<f64> {
        self.kinks.iter().filter(|k| **k > 0.0).map(|k| k.ln()).collect()
    }
}

/// Largest `m` in `[lo, hi]` such that `holds(t)` for the dyadic samples
/// `t = m 2^{-k}`, found by bisection.
fn bisect_threshold(holds: impl Fn(f64) -> bool, lo: f64, hi: f64) -> f64 {
    let ok = |m: f64| (0..64).all(|k| holds(m * 0.5f64.powi(k)));
    if ok(hi) {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if ok(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}

/// `make_builtin_gauge` by name and optional exponent.
pub fn make_builtin_gauge(name: &str, alpha: Option<f64>) -> Result<ThetaGauge, ThetaError> {
    ThetaGauge::builtin(name, alpha)
}

/// Hypotheses checked by [`check_admissibility`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Hypothesis {
    ZeroAtOrigin,
    Bounded,
    Monotone,
    Subadditive,
    SmallGrowth,
    LargeGrowth,
    DerivativeIntegral,
}

impl Hypothesis {
    pub fn key(self) -> &'static str {
        match self {
            Hypothesis::ZeroAtOrigin => "zero_at_origin",
            Hypothesis::Bounded => "bounded",
            Hypothesis::Monotone => "monotone",
            Hypothesis::Subadditive => "subadditive",
            Hypothesis::SmallGrowth => "small_growth",
            Hypothesis::LargeGrowth => "large_growth",
            Hypothesis::DerivativeIntegral => "derivative_integral",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    /// Largest amount by which the hypothesis was violated (≤ 0 when it
    /// holds everywhere sampled).
    pub worst_violation: f64,
    /// Sample attaining `worst_violation`: `[t]` or `[s, t]`.
    pub worst_sample: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub gauge: String,
    pub checks: Vec<HypothesisCheck>,
    pub passed: bool,
}

impl AdmissibilityReport {
    pub fn check(&self, h: Hypothesis) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == h)
    }
}

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// All unordered pairs `(s, t)` with `s ≤ t` drawn from `grid`.
pub fn pair_grid(grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(grid.len() * (grid.len() + 1) / 2);
    for (i, &s) in grid.iter().enumerate() {
        for &t in &grid[i..] {
            out.push((s, t));
        }
    }
    out
}

struct Worst {
    violation: f64,
    sample: Vec<f64>,
}

impl Worst {
    fn new() -> Self {
        Self {
            violation: f64::NEG_INFINITY,
            sample: Vec::new(),
        }
    }

    fn offer(&mut self, v: f64, sample: &[f64]) {
        if v > self.violation {
            self.violation = v;
            self.sample = sample.to_vec();
        }
    }

    fn finish(self, hypothesis: Hypothesis, slack: f64) -> HypothesisCheck {
        let violation = if self.violation.is_finite() {
            self.violation
        } else {
            0.0
        };
        HypothesisCheck {
            hypothesis,
            passed: violation <= slack,
            worst_violation: violation,
            worst_sample: self.sample,
        }
    }
}

/// Checks the gauge hypotheses on sampled points. Violations are recorded
/// in the report, never raised as errors.
pub fn check_admissibility(
    g: &ThetaGauge,
    grid: &[f64],
    pairs: &[(f64, f64)],
    quad: &QuadratureSpec,
) -> AdmissibilityReport {
    let mut checks = Vec::new();

    let mut w = Worst::new();
    w.offer(g.value(0.0).abs(), &[0.0]);
    checks.push(w.finish(Hypothesis::ZeroAtOrigin, 0.0));

    let mut w = Worst::new();
    for &t in grid {
        let v = g.value(t);
        w.offer((-v).max(v - 1.0), &[t]);
    }
    checks.push(w.finish(Hypothesis::Bounded, 0.0));

    let mut w = Worst::new();
    let mut prev = (0.0, g.value(0.0));
    for &t in grid {
        let v = g.value(t);
        if t > prev.0 {
            w.offer(prev.1 - v, &[prev.0, t]);
        }
        prev = (t, v);
    }
    checks.push(w.finish(Hypothesis::Monotone, 0.0));

    let mut w = Worst::new();
    for &(s, t) in pairs {
        w.offer(g.value(s + t) - g.value(s) - g.value(t), &[s, t]);
    }
    checks.push(w.finish(Hypothesis::Subadditive, SUBADDITIVITY_SLACK));

    let alpha = g.growth_exponent;
    let mut w = Worst::new();
    for &t in grid.iter().filter(|t| **t > 0.0 && **t < g.small_threshold) {
        let bound = g.small_constant * t.powf(alpha);
        w.offer(g.value(t) - bound * (1.0 + 4.0 * f64::EPSILON), &[t]);
    }
    checks.push(w.finish(Hypothesis::SmallGrowth, 0.0));

    let mut w = Worst::new();
    for &t in grid.iter().filter(|t| **t > g.large_threshold) {
        let bound = g.large_constant * t.powf(-alpha);
        w.offer(g.complement(t) - bound * (1.0 + 4.0 * f64::EPSILON), &[t]);
    }
    checks.push(w.finish(Hypothesis::LargeGrowth, 0.0));

    let check = match derivative_integral(g, quad) {
        Ok(est) => {
            let dev = (est.value - 1.0).abs();
            HypothesisCheck {
                hypothesis: Hypothesis::DerivativeIntegral,
                passed: dev <= quad.tolerance,
                worst_violation: dev - quad.tolerance,
                worst_sample: vec![est.value],
            }
        }
        Err(_) => HypothesisCheck {
            hypothesis: Hypothesis::DerivativeIntegral,
            passed: false,
            worst_violation: f64::INFINITY,
            worst_sample: Vec::new(),
        },
    };
    checks.push(check);

    let passed = checks.iter().all(|c| c.passed);
    AdmissibilityReport {
        gauge: g.name(),
        checks,
        passed,
    }
}

/// Truncation points `(ε, X)` such that the certified tails of an integral
/// over `(0, ∞)` whose integrand at `0` is dominated by `c0 t^{α-1} / α`
/// style bounds stay below `budget` each.
fn tail_cutoffs(
    g: &ThetaGauge,
    small_scale: f64,
    budget: f64,
) -> Result<(f64, f64), ThetaError> {
    let a = g.growth_exponent;
    let eps = (budget / (g.small_constant * small_scale))
        .powf(1.0 / a)
        .min(g.small_threshold);
    let big = (g.large_constant / budget).powf(1.0 / a).max(g.large_threshold);
    if !(eps > f64::MIN_POSITIVE && big.is_finite() && big < 1e300) {
        return Err(QuadratureError::TailBudget {
            bound: f64::INFINITY,
            budget,
        }
        .into());
    }
    Ok((eps, big))
}

/// `∫₀^∞ θ'(t) dt` with certified tails `θ(ε) ≤ C₀ ε^α` and
/// `1 − θ(X) ≤ C₁ X^{−α}`.
pub fn derivative_integral(
    g: &ThetaGauge,
    quad: &QuadratureSpec,
) -> Result<Estimate<f64>, ThetaError> {
    let integ = Integrator::new(*quad)?;
    let budget = quad.tolerance / 4.0;
    let (eps, big) = tail_cutoffs(g, 1.0, budget)?;
    let breaks = merge_breaks(&dyadic_breaks(eps, big), g.kinks(), eps, big);
    let f = |t: f64| g.derivative(t).unwrap_or(0.0);
    let mut est = integ.integrate_panels(&f, &breaks, quad.tolerance / 2.0)?;
    est.error += 2.0 * budget;
    Ok(est)
}

/// The Frullani integral `∫₀^∞ (θ(ρx) − θ(x)) / x dx`, which equals
/// `ln ρ` for every admissible gauge.
///
/// Integrated in `x` on dyadic panels split at the kinks of both terms.
/// The lower tail is bounded by `C₀ ρ^α ε^α / α` and the upper tail by
/// `C₁ X^{−α} / α`.
pub fn frullani_integral(
    g: &ThetaGauge,
    rho: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate<f64>, ThetaError> {
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(ThetaError::InvalidArgument(format!(
            "Frullani ratio must exceed 1, got {rho}"
        )));
    }
    let integ = Integrator::new(*quad)?;
    let a = g.growth_exponent;
    let budget = quad.tolerance / 4.0;
    let (eps, big) = tail_cutoffs(g, rho.powf(a) / a, budget * a.min(1.0))?;
    let eps = eps.min(g.small_threshold / rho);
    let kinks: Vec<f64> = g
        .kinks()
        .iter()
        .flat_map(|k| [*k, *k / rho])
        .collect();
    let breaks = merge_breaks(&dyadic_breaks(eps, big), &kinks, eps, big);
    let f = |x: f64| {
        if x >= 1.0 {
            (g.complement(x) - g.complement(rho * x)) / x
        } else {
            (g.value(rho * x) - g.value(x)) / x
        }
    };
    let mut est = integ.integrate_panels(&f, &breaks, quad.tolerance / 2.0)?;
    est.error += 2.0 * budget;
    Ok(est)
}

/// `G_u(y) = F(u + y) − F(y)`.
pub fn gu_kernel(g: &ThetaGauge, u: f64, y: f64) -> f64 {
    if y >= 0.0 {
        g.log_complement(y) - g.log_complement(u + y)
    } else {
        g.log_gauge(u + y) - g.log_gauge(y)
    }
}

/// Window `[−W₁, W₂]` outside which `|G_u(w) e^{−iwz}|` integrates to at
/// most `budget` on each side, for `Im z = eta`.
fn gu_window(g: &ThetaGauge, u: f64, eta: f64, budget: f64) -> (f64, f64) {
    let a = g.growth_exponent;
    let lo_rate = a + eta;
    let hi_rate = a - eta;
    // G_u(w) ≤ F(u+w) ≤ C₀ e^{α(u+w)} once e^{u+w} < m.
    let w1 = ((g.small_constant * (a * u).exp() / (lo_rate * budget)).ln() / lo_rate)
        .max(u - g.small_threshold.ln());
    // G_u(w) ≤ 1 − F(w) ≤ C₁ e^{−αw} once e^w > M.
    let w2 = ((g.large_constant / (hi_rate * budget)).ln() / hi_rate).max(g.large_threshold.ln());
    (-w1.max(0.0), w2.max(0.0))
}

/// `∫ G_u(y) dy` computed in log coordinates.
pub fn gu_integral(g: &ThetaGauge, u: f64, quad: &QuadratureSpec) -> Result<Estimate<f64>, ThetaError> {
    check_shift(u)?;
    let integ = Integrator::new(*quad)?;
    let budget = quad.tolerance / 4.0;
    let (lo, hi) = gu_window(g, u, 0.0, budget);
    let breaks = kernel_breaks(g, u, lo, hi, 1.0);
    let mut est = integ.integrate_panels(&|y: f64| gu_kernel(g, u, y), &breaks, quad.tolerance / 2.0)?;
    est.error += 2.0 * budget;
    Ok(est)
}

fn kernel_breaks(g: &ThetaGauge, u: f64, lo: f64, hi: f64, width: f64) -> Vec<f64> {
    let kinks: Vec<f64> = g.log_kinks().into_iter().flat_map(|k| [k, k - u]).collect();
    merge_breaks(&uniform_breaks(lo, hi, width), &kinks, lo, hi)
}

fn check_shift(u: f64) -> Result<(), ThetaError> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(ThetaError::InvalidArgument(format!(
            "shift u must be positive, got {u}"
        )))
    }
}

/// `Ĝ_u(z) = ∫ G_u(w) e^{−iwz} dw` for `|Im z| < α − margin`.
pub fn gu_fourier(
    g: &ThetaGauge,
    u: f64,
    z: Complex64,
    quad: &QuadratureSpec,
) -> Result<Complex64, ThetaError> {
    Ok(gu_fourier_estimate(g, u, z, quad)?.value)
}

/// [`gu_fourier`] with its error estimate (quadrature plus both tails).
pub fn gu_fourier_estimate(
    g: &ThetaGauge,
    u: f64,
    z: Complex64,
    quad: &QuadratureSpec,
) -> Result<Estimate<Complex64>, ThetaError> {
    check_shift(u)?;
    let limit = g.growth_exponent - quad.strip_margin;
    if !(z.im.abs() < limit) {
        return Err(ThetaError::StripViolation {
            imag: z.im.abs(),
            limit,
        });
    }
    let integ = Integrator::new(*quad)?;
    let budget = quad.tolerance / 4.0;
    let (lo, hi) = gu_window(g, u, z.im, budget);
    let width = if z.re.abs() > 1.0 { 1.0 / z.re.abs() } else { 1.0 };
    let breaks = kernel_breaks(g, u, lo, hi, width);
    let f = |w: f64| (Complex64::new(0.0, -w) * z).exp() * gu_kernel(g, u, w);
    let mut est = integ.integrate_panels(&f, &breaks, quad.tolerance / 2.0)?;
    est.error += 2.0 * budget;
    Ok(est)
}
