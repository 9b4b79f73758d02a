//! Weight sequences, the seminorm metric `d(x, 0) = Σ rₙ θ(‖x‖ₙ)`, its
//! moment curve `t ↦ Σ rₙ θ(t aₙ)`, and the two uniqueness arguments built
//! on it: separation of distinct seminorm vectors and recovery of the first
//! nonzero seminorm from the `t → ∞` limit.

use thiserror::Error;

use crate::theta::ThetaGauge;

/// Tolerance on `Σ weights + declared_tail = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Default absolute curve gap certifying that two vectors differ.
pub const SEPARATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("weights must be strictly positive and finite (index {0})")]
    NonPositiveWeight(usize),
    #[error("declared tail must be nonnegative, got {0}")]
    NegativeTail(f64),
    #[error("weights plus declared tail sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("seminorm entries must be finite and nonnegative (index {0})")]
    InvalidEntry(usize),
    #[error("entry {0} must be strictly positive")]
    NonPositiveEntry(usize),
    #[error("vector must be nondecreasing (index {0})")]
    NotNondecreasing(usize),
    #[error("scale parameter must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("measure invalid: {0}")]
    InvalidMeasure(String),
    #[error("t = {t} does not exceed M / min(aₙ > 0) = {required}")]
    ScaleTooSmall { t: f64, required: f64 },
    #[error("ambiguous support start: residual bound {bound:e}, half smallest weight {half_weight:e}, mismatch {mismatch:e}")]
    AmbiguousMatch {
        bound: f64,
        half_weight: f64,
        mismatch: f64,
    },
}

/// Truncated positive weights `r₀ … r_N` plus the mass of the omitted tail.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    weights: Vec<f64>,
    declared_tail: f64,
}

impl WeightSequence {
    pub fn new(weights: Vec<f64>, declared_tail: f64) -> Result<Self, MetricError> {
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(MetricError::NonPositiveWeight(i));
        }
        if !(declared_tail >= 0.0 && declared_tail.is_finite()) {
            return Err(MetricError::NegativeTail(declared_tail));
        }
        let total: f64 = weights.iter().sum::<f64>() + declared_tail;
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(MetricError::NotNormalized(total));
        }
        Ok(Self {
            weights,
            declared_tail,
        })
    }

    /// Rescales positive `raw` weights to sum to one with an empty tail.
    pub fn normalized(raw: &[f64]) -> Result<Self, MetricError> {
        if let Some(i) = raw.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(MetricError::NonPositiveWeight(i));
        }
        let total: f64 = raw.iter().sum();
        Self::new(raw.iter().map(|w| w / total).collect(), 0.0)
    }

    /// `rₙ = 2^{−(n+1)}` for `n < len`, tail `2^{−len}`.
    pub fn geometric(len: usize) -> Self {
        let weights: Vec<f64> = (0..len).map(|n| 0.5f64.powi(n as i32 + 1)).collect();
        let tail = 0.5f64.powi(len as i32);
        Self {
            weights,
            declared_tail: tail,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn declared_tail(&self) -> f64 {
        self.declared_tail
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ_{n ≥ k} rₙ` over the stored weights.
    pub fn tail_mass_from(&self, k: usize) -> f64 {
        self.weights.iter().skip(k).sum()
    }
}

/// Seminorm values `a₀ … a_N` of one vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormVector {
    values: Vec<f64>,
}

impl SeminormVector {
    pub fn new(values: Vec<f64>) -> Result<Self, MetricError> {
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(MetricError::InvalidEntry(i));
        }
        Ok(Self { values })
    }

    /// Like [`SeminormVector::new`] but also requires a nondecreasing
    /// sequence, as produced by an increasing seminorm family.
    pub fn increasing(values: Vec<f64>) -> Result<Self, MetricError> {
        let v = Self::new(values)?;
        if let Some(i) = v.first_decrease() {
            return Err(MetricError::NotNondecreasing(i));
        }
        Ok(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.first_decrease().is_none()
    }

    fn first_decrease(&self) -> Option<usize> {
        self.values.windows(2).position(|w| w[1] < w[0]).map(|i| i + 1)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * t).collect(),
        }
    }

    fn require_positive(&self) -> Result<(), MetricError> {
        match self.values.iter().position(|v| *v <= 0.0) {
            Some(i) => Err(MetricError::NonPositiveEntry(i)),
            None => Ok(()),
        }
    }
}

/// Finite positive measure `Σ mⱼ δ_{xⱼ}` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<f64>,
    masses: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<f64>, masses: Vec<f64>) -> Result<Self, MetricError> {
        if atoms.len() != masses.len() {
            return Err(MetricError::LengthMismatch {
                left: atoms.len(),
                right: masses.len(),
            });
        }
        if atoms.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(MetricError::InvalidMeasure("atoms must be positive".into()));
        }
        if atoms.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MetricError::InvalidMeasure(
                "atoms must be strictly ascending".into(),
            ));
        }
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(MetricError::InvalidMeasure("masses must be positive".into()));
        }
        let total: f64 = masses.iter().sum();
        if total > 1.0 + NORMALIZATION_TOL {
            return Err(MetricError::InvalidMeasure(format!(
                "total mass {total} exceeds 1"
            )));
        }
        Ok(Self { atoms, masses })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `∫ θ(t x) dμ(x)`.
    pub fn moment(&self, g: &ThetaGauge, t: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.masses)
            .map(|(x, m)| m * g.value(t * x))
            .sum()
    }

    /// Equality up to `tol` on masses; atoms must coincide exactly.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.atoms == other.atoms
            && self
                .masses
                .iter()
                .zip(&other.masses)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Interval enclosing the metric of every untruncated extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricInterval {
    pub lo: f64,
    pub hi: f64,
}

fn check_lengths(r: &WeightSequence, a: &SeminormVector) -> Result<(), MetricError> {
    if r.len() != a.len() {
        return Err(MetricError::LengthMismatch {
            left: r.len(),
            right: a.len(),
        });
    }
    Ok(())
}

fn weighted_sum(g: &ThetaGauge, r: &WeightSequence, a: &SeminormVector, t: f64) -> f64 {
    r.weights()
        .iter()
        .zip(a.values())
        .map(|(w, v)| w * g.value(t * v))
        .sum()
}

/// `d(x, 0)` from the seminorm values of `x`: `lo` sums the stored entries,
/// `hi` adds the declared tail (each omitted summand lies in `[0, rₙ]`).
pub fn metric_value(
    g: &ThetaGauge,
    r: &WeightSequence,
    a: &SeminormVector,
) -> Result<MetricInterval, MetricError> {
    check_lengths(r, a)?;
    let lo = weighted_sum(g, r, a, 1.0);
    Ok(MetricInterval {
        lo,
        hi: lo + r.declared_tail(),
    })
}

/// `Σ rₙ θ(t aₙ)`.
pub fn moment_curve(
    g: &ThetaGauge,
    r: &WeightSequence,
    a: &SeminormVector,
    t: f64,
) -> Result<f64, MetricError> {
    check_lengths(r, a)?;
    if !(t > 0.0) {
        return Err(MetricError::NonPositiveScale(t));
    }
    Ok(weighted_sum(g, r, a, t))
}

/// Merges coincident entries of `a` into one atom carrying their summed
/// weights.
pub fn measures_from_vectors(
    r: &WeightSequence,
    a: &SeminormVector,
) -> Result<AtomicMeasure, MetricError> {
    check_lengths(r, a)?;
    a.require_positive()?;
    let mut pairs: Vec<(f64, f64)> = a
        .values()
        .iter()
        .copied()
        .zip(r.weights().iter().copied())
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut atoms: Vec<f64> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    for (x, w) in pairs {
        match atoms.last() {
            Some(last) if *last == x => *masses.last_mut().expect("paired") += w,
            _ => {
                atoms.push(x);
                masses.push(w);
            }
        }
    }
    AtomicMeasure::new(atoms, masses)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeparationResult {
    /// The two vectors define the same measure.
    NotSeparated { max_gap: f64 },
    /// `gap` at `t_star` exceeds the tolerance, certifying `a ≠ b`.
    Separated { t_star: f64, gap: f64 },
    /// Distinct measures whose curves agree on the grid up to tolerance;
    /// the grid may simply be too coarse.
    Inconclusive { t_star: f64, max_gap: f64 },
}

impl SeparationResult {
    pub fn is_separated(&self) -> bool {
        matches!(self, SeparationResult::Separated { .. })
    }

    pub fn gap(&self) -> f64 {
        match *self {
            SeparationResult::NotSeparated { max_gap } => max_gap,
            SeparationResult::Separated { gap, .. } => gap,
            SeparationResult::Inconclusive { max_gap, .. } => max_gap,
        }
    }
}

/// Searches `t_grid` for a scale at which the moment curves of `a` and `b`
/// differ, using [`SEPARATION_TOL`].
pub fn separate(
    g: &ThetaGauge,
    r: &WeightSequence,
    a: &SeminormVector,
    b: &SeminormVector,
    t_grid: &[f64],
) -> Result<SeparationResult, MetricError> {
    separate_with_tolerance(g, r, a, b, t_grid, SEPARATION_TOL)
}

pub fn separate_with_tolerance(
    g: &ThetaGauge,
    r: &WeightSequence,
    a: &SeminormVector,
    b: &SeminormVector,
    t_grid: &[f64],
    tol: f64,
) -> Result<SeparationResult, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0)) {
        return Err(MetricError::NonPositiveScale(*t));
    }
    let mu_a = measures_from_vectors(r, a)?;
    let mu_b = measures_from_vectors(r, b)?;
    let (t_star, max_gap) = t_grid
        .iter()
        .map(|&t| (t, (mu_a.moment(g, t) - mu_b.moment(g, t)).abs()))
        .fold((f64::NAN, 0.0), |best, cur| if cur.1 > best.1 || best.0.is_nan() { cur } else { best });
    // Exact arithmetic on merged masses only differs in the last ulps.
    if mu_a.approx_eq(&mu_b, 4.0 * f64::EPSILON) {
        return Ok(SeparationResult::NotSeparated { max_gap });
    }
    if max_gap > tol {
        Ok(SeparationResult::Separated {
            t_star,
            gap: max_gap,
        })
    } else {
        Ok(SeparationResult::Inconclusive { t_star, max_gap })
    }
}

/// First nonzero index recovered from the large-`t` limit of the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportStart {
    pub index: usize,
    pub tail_mass: f64,
    pub curve_value: f64,
    pub residual_bound: f64,
}

/// Recovers `n₁ = min{n : aₙ > 0}` by matching `Σ rₙ θ(t aₙ)` at large `t`
/// against the tail masses `Σ_{n ≥ k} rₙ`. Nothing but the curve value
/// enters the match; the support of `a` is used only for the error bound.
pub fn count_support_start(
    g: &ThetaGauge,
    r: &WeightSequence,
    a: &SeminormVector,
    t_large: f64,
) -> Result<SupportStart, MetricError> {
    check_lengths(r, a)?;
    if let Some(i) = a.first_decrease() {
        return Err(MetricError::NotNondecreasing(i));
    }
    let min_positive = a
        .values()
        .iter()
        .copied()
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_positive.is_finite() {
        let required = g.large_threshold() / min_positive;
        if !(t_large > required) {
            return Err(MetricError::ScaleTooSmall {
                t: t_large,
                required,
            });
        }
    }
    let curve_value = moment_curve(g, r, a, t_large)?;
    let n = r.len();
    let tails: Vec<f64> = (0..=n).map(|k| r.tail_mass_from(k)).collect();
    let (index, tail_mass) = tails
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| (x.1 - curve_value).abs().total_cmp(&(y.1 - curve_value).abs()))
        .expect("at least the empty tail");
    let alpha = g.growth_exponent();
    let residual_bound = g.large_constant()
        * r.weights()
            .iter()
            .zip(a.values())
            .filter(|(_, v)| **v > 0.0)
            .map(|(w, v)| w * (t_large * v).powf(-alpha))
            .sum::<f64>()
        + 16.0 * f64::EPSILON * (n as f64 + 1.0);
    let half_weight = 0.5 * r.weights().iter().copied().fold(f64::INFINITY, f64::min);
    let mismatch = (tail_mass - curve_value).abs();
    if residual_bound >= half_weight || mismatch > residual_bound {
        return Err(MetricError::AmbiguousMatch {
            bound: residual_bound,
            half_weight,
            mismatch,
        });
    }
    Ok(SupportStart {
        index,
        tail_mass,
        curve_value,
        residual_bound,
    })
}

/// A scale `t` at which [`count_support_start`] is guaranteed unambiguous:
/// the certified residual stays below a quarter of the smallest weight.
pub fn sufficient_large_t(g: &ThetaGauge, r: &WeightSequence, a: &SeminormVector) -> f64 {
    let min_positive = a
        .values()
        .iter()
        .copied()
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !min_positive.is_finite() {
        return 2.0 * g.large_threshold().max(1.0);
    }
    let min_weight = r.weights().iter().copied().fold(f64::INFINITY, f64::min);
    let total: f64 = r.weights().iter().sum();
    let scale = (4.0 * g.large_constant() * total / min_weight).powf(1.0 / g.growth_exponent());
    2.0 * scale.max(g.large_threshold()) / min_positive
}
