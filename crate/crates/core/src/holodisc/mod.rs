//! Truncated Taylor model of holomorphic functions on the unit disc, circle
//! seminorms, and Hadamard's three-circle inequality.

pub mod operator;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

pub use operator::{
    apply_operator, apply_operator_with, characterize_isometry, isometry_test, rotation_matrix,
    Applied, Certificate, Characterization, CheckName, CheckRecord, DiscMap, DiscOperator,
    IsometryReport,
};

/// Default degree bound of the model.
pub const DEFAULT_DEGREE: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HoloError {
    #[error("coefficients must be finite and nonempty")]
    InvalidCoefficients,
    #[error("invalid radii: {0}")]
    InvalidRadii(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("function vanishes on a sampled circle")]
    ZeroFunction,
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("truncation norm {norm:e} exceeds tolerance {tol:e} at degree budget {budget}")]
    TruncationOverflow { norm: f64, tol: f64, budget: usize },
    #[error("input degree {degree} exceeds operator size {size}")]
    DimensionMismatch { degree: usize, size: usize },
    #[error("not characterizable: {check} check failed (residual {residual:e})")]
    NotCharacterizable {
        check: CheckName,
        residual: f64,
        certificate: Box<Certificate>,
    },
}

/// `f(z) = Σ_{k ≤ D} c_k z^k`.
#[derive(Debug, Clone)]
pub struct TaylorFunction {
    coeffs: Vec<Complex64>,
}

impl PartialEq for TaylorFunction {
    fn eq(&self, other: &Self) -> bool {
        self.trimmed() == other.trimmed()
    }
}

impl TaylorFunction {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, HoloError> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(HoloError::InvalidCoefficients);
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, HoloError> {
        Self::new(coeffs.iter().map(|c| Complex64::new(*c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `𝟙`.
    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// `c z^k`.
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    /// `e₁(z) = z`.
    pub fn identity() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Degree bound `D`.
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients with exact trailing zeros removed (at least one kept).
    pub fn trimmed(&self) -> &[Complex64] {
        let zero = Complex64::new(0.0, 0.0);
        let end = self.coeffs.iter().rposition(|c| *c != zero).map_or(1, |i| i + 1);
        &self.coeffs[..end]
    }

    pub fn degree(&self) -> usize {
        self.trimmed().len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `f(r e^{2πij/q})` for `j < q`.
    pub fn circle_values(&self, r: f64, q: usize) -> Vec<Complex64> {
        (0..q)
            .map(|j| self.eval(Complex64::from_polar(r, TAU * j as f64 / q as f64)))
            .collect()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self {
            coeffs: (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Full product, degree `deg f + deg g`.
    pub fn mul(&self, other: &Self) -> Self {
        let a = self.trimmed();
        let b = other.trimmed();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                coeffs[i + j] += x * y;
            }
        }
        Self { coeffs }
    }

    /// Full composition `f ∘ φ` by Horner in the polynomial ring.
    pub fn compose(&self, phi: &Self) -> Self {
        let mut acc = Self::constant(Complex64::new(0.0, 0.0));
        for c in self.trimmed().iter().rev() {
            acc = acc.mul(phi).add(&Self::constant(*c));
        }
        acc
    }

    /// Splits at degree `budget`, returning the kept part and the ℓ¹ norm of
    /// the dropped coefficients (a bound on their sup over the disc).
    pub fn truncate(&self, budget: usize) -> (Self, f64) {
        let keep = self.coeffs.len().min(budget + 1);
        let dropped = self.coeffs[keep..].iter().map(|c| c.norm()).sum();
        (
            Self {
                coeffs: self.coeffs[..keep].to_vec(),
            },
            dropped,
        )
    }

    /// `Σ_{k ≥ 1} |c_k|`.
    pub fn tail_mass(&self) -> f64 {
        self.coeffs.iter().skip(1).map(|c| c.norm()).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Exactly one nonzero coefficient, up to `tol` relative to the largest.
    pub fn is_monomial(&self, tol: f64) -> bool {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        max > 0.0 && self.coeffs.iter().filter(|c| c.norm() > tol * max).count() == 1
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }
}

/// Circles `|z| = r₁ < … < r_K < 1` with `Q` samples each.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscExhaustion {
    radii: Vec<f64>,
    circle_samples: usize,
}

impl DiscExhaustion {
    pub fn new(radii: Vec<f64>, circle_samples: usize) -> Result<Self, HoloError> {
        if radii.is_empty() {
            return Err(HoloError::InvalidRadii("no radii".into()));
        }
        if radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(HoloError::InvalidRadii("radii must lie in (0, 1)".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HoloError::InvalidRadii("radii must be strictly increasing".into()));
        }
        if circle_samples < 4 || !circle_samples.is_power_of_two() {
            return Err(HoloError::InvalidParameter(format!(
                "circle samples must be a power of two ≥ 4, got {circle_samples}"
            )));
        }
        Ok(Self {
            radii,
            circle_samples,
        })
    }

    /// Radii `1 − 1/n` for the given indices `n ≥ 2`.
    pub fn from_indices(indices: &[usize], degree: usize) -> Result<Self, HoloError> {
        if indices.iter().any(|n| *n < 2) {
            return Err(HoloError::InvalidRadii("indices start at 2".into()));
        }
        Self::new(
            indices.iter().map(|n| (*n - 1) as f64 / *n as f64).collect(),
            samples_for_degree(degree),
        )
    }

    /// `rₙ = 1 − 1/n` for `n = 2 … K+1`.
    pub fn standard(k: usize, degree: usize) -> Result<Self, HoloError> {
        Self::from_indices(&(2..k + 2).collect::<Vec<_>>(), degree)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn circle_samples(&self) -> usize {
        self.circle_samples
    }

    /// Samples used for `f`: `Q`, raised to the power of two ≥ `4·D`.
    pub fn samples_for(&self, f: &TaylorFunction) -> usize {
        self.circle_samples.max(samples_for_degree(f.degree_bound()))
    }
}

/// Power of two `≥ max(4·D, 64)`.
pub fn samples_for_degree(degree: usize) -> usize {
    (4 * degree).max(64).next_power_of_two()
}

/// Seminorm family: circle maxima or circle `p`-means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Sup,
    Hp(f64),
}

impl Family {
    pub fn validate(self) -> Result<(), HoloError> {
        match self {
            Family::Hp(p) if !(p >= 1.0 && p.is_finite()) => Err(HoloError::InvalidParameter(format!(
                "p must be ≥ 1, got {p}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn label(self) -> String {
        match self {
            Family::Sup => "sup".into(),
            Family::Hp(p) => format!("hp({p})"),
        }
    }

    pub fn seminorm(self, f: &TaylorFunction, r: f64, q: usize) -> f64 {
        match self {
            Family::Sup => sup_seminorm(f, r, q),
            Family::Hp(p) => hp_seminorm(f, p, r, q),
        }
    }
}

fn modulus_sq(f: &TaylorFunction, r: f64, theta: f64) -> f64 {
    f.eval(Complex64::from_polar(r, theta)).norm_sqr()
}

/// `max_{|z| = r} |f(z)|`: the largest sample over `Q` equispaced angles,
/// with each competitive local maximum polished by golden-section search
/// between its neighbouring nodes. The polish makes the value track the true
/// maximum, so it is nondecreasing in `r` like the exact seminorm.
pub fn sup_seminorm(f: &TaylorFunction, r: f64, q: usize) -> f64 {
    let q = q.max(samples_for_degree(f.degree_bound()));
    let step = TAU / q as f64;
    let vals: Vec<f64> = f.circle_values(r, q).iter().map(|v| v.norm_sqr()).collect();
    let grid_max = vals.iter().copied().fold(0.0, f64::max);
    if f.is_monomial(0.0) || grid_max == 0.0 {
        return grid_max.sqrt();
    }
    let mut best = grid_max;
    for j in 0..q {
        let prev = vals[(j + q - 1) % q];
        let next = vals[(j + 1) % q];
        if vals[j] >= prev && vals[j] >= next && vals[j] >= 0.5 * grid_max {
            let theta = step * j as f64;
            best = best.max(golden_max(|t| modulus_sq(f, r, t), theta - step, theta + step));
        }
    }
    best.sqrt()
}

fn golden_max(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut hc = h(c);
    let mut hd = h(d);
    let mut best = hc.max(hd);
    for _ in 0..80 {
        if hc >= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
        }
        best = best.max(hc).max(hd);
        if b - a < 1e-14 {
            break;
        }
    }
    best
}

/// Largest node count tried by [`hp_seminorm`] for `p ≠ 2`.
pub const MAX_CIRCLE_SAMPLES: usize = 1 << 18;

/// `M_{p,r}(f) = ((1/2π) ∫ |f(re^{iθ})|^p dθ)^{1/p}` by the equispaced rule.
/// At `p = 2` the rule is exact once `Q > D`. Otherwise `|f|^p` is not a
/// trigonometric polynomial and `Q` is doubled until consecutive means agree
/// to rounding; nodes of one level are reused by the next.
pub fn hp_seminorm(f: &TaylorFunction, p: f64, r: f64, q: usize) -> f64 {
    if p == 2.0 {
        let vals = f.circle_values(r, q);
        return (vals.iter().map(|v| v.norm_sqr()).sum::<f64>() / q as f64).sqrt();
    }
    let term = |v: Complex64| v.norm().powf(p);
    let mut n = q;
    let mut sum: f64 = f.circle_values(r, n).into_iter().map(term).sum();
    let mut mean = sum / n as f64;
    while n < MAX_CIRCLE_SAMPLES {
        let odd: f64 = (0..n)
            .map(|j| term(f.eval(Complex64::from_polar(r, TAU * (2 * j + 1) as f64 / (2 * n) as f64))))
            .sum();
        sum += odd;
        n *= 2;
        let refined = sum / n as f64;
        let settled = (refined - mean).abs() <= 4.0 * f64::EPSILON * refined;
        mean = refined;
        if settled {
            break;
        }
    }
    mean.powf(1.0 / p)
}

/// `(Σ |c_k|² r^{2k})^{1/2}`.
pub fn parseval_norm(f: &TaylorFunction, r: f64) -> f64 {
    f.coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm_sqr() * r.powi(2 * k as i32))
        .sum::<f64>()
        .sqrt()
}

/// Coefficients uniform in the square `[−1, 1]²`, up to `degree`.
pub fn random_polynomial(degree: usize, rng: &mut impl Rng) -> TaylorFunction {
    let coeffs = (0..=degree)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    TaylorFunction::new(coeffs).expect("finite")
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub values: Vec<f64>,
    /// Smallest consecutive increase.
    pub min_gap: f64,
    pub constant_function: bool,
    pub passed: bool,
}

/// Checks `r ↦ M_{p,r}(f)` on `radius_grid`: strictly increasing for
/// non-constant `f`, flat for constants.
pub fn strict_monotonicity_check(
    f: &TaylorFunction,
    p: f64,
    radius_grid: &[f64],
    q: usize,
) -> Result<MonotonicityReport, HoloError> {
    Family::Hp(p).validate()?;
    if radius_grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) || radius_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HoloError::InvalidRadii("grid must increase inside (0, 1)".into()));
    }
    let q = q.max(samples_for_degree(f.degree_bound()));
    let values: Vec<f64> = radius_grid.iter().map(|r| hp_seminorm(f, p, *r, q)).collect();
    let min_gap = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let constant_function = f.is_constant();
    let passed = if constant_function {
        let scale = values.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        values.iter().all(|v| (v - values[0]).abs() <= 8.0 * f64::EPSILON * scale)
    } else {
        min_gap > 0.0
    };
    Ok(MonotonicityReport {
        values,
        min_gap,
        constant_function,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeCircle {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub rigidity_flag: bool,
}

/// Tolerance below which the three-circle slack signals rigidity.
pub const RIGIDITY_TOL: f64 = 1e-10;

/// `log(r₃/r₁) log M(r₂) ≤ log(r₃/r₂) log M(r₁) + log(r₂/r₁) log M(r₃)`.
pub fn three_circle_check(
    f: &TaylorFunction,
    radii: [f64; 3],
    q: usize,
    tol: f64,
) -> Result<ThreeCircle, HoloError> {
    let [r1, r2, r3] = radii;
    if !(0.0 < r1 && r1 < r2 && r2 < r3 && r3 < 1.0) {
        return Err(HoloError::InvalidRadii("need 0 < r1 < r2 < r3 < 1".into()));
    }
    let m: Vec<f64> = radii.iter().map(|r| sup_seminorm(f, *r, q)).collect();
    if m.iter().any(|v| !(*v > 0.0)) {
        return Err(HoloError::ZeroFunction);
    }
    let lhs = (r3 / r1).ln() * m[1].ln();
    let rhs = (r3 / r2).ln() * m[0].ln() + (r2 / r1).ln() * m[2].ln();
    let slack = rhs - lhs;
    Ok(ThreeCircle {
        lhs,
        rhs,
        slack,
        rigidity_flag: slack < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_plus_z() -> TaylorFunction {
        TaylorFunction::from_real(&[1.0, 1.0]).unwrap()
    }

    #[test]
    fn construction_and_equality() {
        assert!(TaylorFunction::new(vec![]).is_err());
        assert!(TaylorFunction::new(vec![c(f64::NAN, 0.0)]).is_err());
        let a = TaylorFunction::from_real(&[1.0, 2.0, 0.0, 0.0]).unwrap();
        let b = TaylorFunction::from_real(&[1.0, 2.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.degree(), 1);
        assert_eq!(a.degree_bound(), 3);
    }

    #[test]
    fn algebra() {
        let f = one_plus_z();
        let sq = f.mul(&f);
        assert_eq!(sq, TaylorFunction::from_real(&[1.0, 2.0, 1.0]).unwrap());
        let comp = sq.compose(&TaylorFunction::monomial(c(1.0, 0.0), 2));
        assert_eq!(comp, TaylorFunction::from_real(&[1.0, 0.0, 2.0, 0.0, 1.0]).unwrap());
        let (kept, dropped) = comp.truncate(2);
        assert_eq!(kept.degree_bound(), 2);
        assert_eq!(dropped, 1.0);
        let z = c(0.3, -0.2);
        assert!((comp.eval(z) - (1.0 + z * z).powi(2)).norm() < 1e-15);
    }

    #[test]
    fn sup_examples() {
        for k in 0..6 {
            let f = TaylorFunction::monomial(c(1.0, 0.0), k);
            assert!((sup_seminorm(&f, 0.7, 64) - 0.7f64.powi(k as i32)).abs() < 1e-15);
        }
        assert_eq!(sup_seminorm(&TaylorFunction::one(), 0.3, 64), 1.0);
        let brute = (0..100_000)
            .map(|j| one_plus_z().eval(Complex64::from_polar(0.5, TAU * j as f64 / 100_000.0)).norm())
            .fold(0.0, f64::max);
        let s = sup_seminorm(&one_plus_z(), 0.5, 64);
        assert!((s - 1.5).abs() < 1e-15);
        assert!(s >= brute - 1e-15);
    }

    #[test]
    fn sup_locates_off_grid_maximum() {
        let f = TaylorFunction::new(vec![c(1.0, 0.0), Complex64::from_polar(1.0, 0.123)]).unwrap();
        assert!((sup_seminorm(&f, 0.5, 64) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn hp_examples() {
        let z = TaylorFunction::identity();
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert!((hp_seminorm(&z, p, 0.4, 64) - 0.4).abs() < 1e-15);
            assert!((hp_seminorm(&TaylorFunction::one(), p, 0.9, 64) - 1.0).abs() < 1e-15);
        }
        assert!((hp_seminorm(&one_plus_z(), 2.0, 0.5, 64) - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn monotonicity_examples() {
        let flat = strict_monotonicity_check(&TaylorFunction::constant(c(2.0, 1.0)), 1.0, &[0.1, 0.5, 0.9], 64).unwrap();
        assert!(flat.passed && flat.constant_function);
        let lin = strict_monotonicity_check(&TaylorFunction::identity(), 3.0, &[0.1, 0.5, 0.9], 64).unwrap();
        assert!(lin.passed);
        for (v, r) in lin.values.iter().zip([0.1, 0.5, 0.9]) {
            assert!((v - r).abs() < 1e-15);
        }
        let f = TaylorFunction::new(vec![c(0.3, 1.0), c(-0.5, 0.2), c(0.1, 0.1), c(1.0, -1.0), c(0.0, 0.4), c(0.2, 0.0)]).unwrap();
        let grid: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
        let rep = strict_monotonicity_check(&f, 1.0, &grid, 64).unwrap();
        assert!(rep.passed);
        let dense = strict_monotonicity_check(&f, 1.0, &grid, 4096).unwrap();
        for (a, b) in rep.values.iter().zip(&dense.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn three_circle_examples() {
        let mono = TaylorFunction::monomial(c(5.0, 0.0), 3);
        let t = three_circle_check(&mono, [0.25, 0.5, 0.75], 64, RIGIDITY_TOL).unwrap();
        assert!(t.slack.abs() < 1e-14 && t.rigidity_flag);
        let t = three_circle_check(&one_plus_z(), [0.25, 0.5, 0.75], 64, RIGIDITY_TOL).unwrap();
        let m = |r: f64| (1.0 + r).ln();
        let expect = (0.75f64 / 0.5).ln() * m(0.25) + 2f64.ln() * m(0.75) - 3f64.ln() * m(0.5);
        assert!((t.slack - expect).abs() < 1e-15);
        assert!(t.slack > 0.0 && !t.rigidity_flag);
        let t = three_circle_check(&TaylorFunction::one(), [0.25, 0.5, 0.75], 64, RIGIDITY_TOL).unwrap();
        assert!(t.slack == 0.0 && t.rigidity_flag);
        assert!(matches!(
            three_circle_check(&TaylorFunction::constant(c(0.0, 0.0)), [0.25, 0.5, 0.75], 64, RIGIDITY_TOL),
            Err(HoloError::ZeroFunction)
        ));
    }

    #[test]
    fn exhaustion_defaults() {
        let e = DiscExhaustion::standard(3, 64).unwrap();
        assert_eq!(e.radii(), &[0.5, 2.0 / 3.0, 0.75]);
        assert_eq!(e.circle_samples(), 256);
        assert!(DiscExhaustion::new(vec![0.5, 0.4], 64).is_err());
        assert!(DiscExhaustion::new(vec![0.5], 100).is_err());
    }

    fn poly(max_deg: usize) -> impl Strategy<Value = TaylorFunction> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=max_deg + 1)
            .prop_map(|v| TaylorFunction::new(v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn parseval_exact(f in poly(32), ri in 0usize..3) {
            let r = [0.5, 2.0 / 3.0, 0.75][ri];
            let q = samples_for_degree(f.degree_bound());
            prop_assert!((hp_seminorm(&f, 2.0, r, q) - parseval_norm(&f, r)).abs() < 1e-12);
        }

        #[test]
        fn circle_means_nondecreasing(f in poly(12), p in 1.0f64..4.0) {
            let grid = [0.2, 0.4, 0.6, 0.8];
            let rep = strict_monotonicity_check(&f, p, &grid, 256).unwrap();
            prop_assert!(rep.min_gap >= -1e-15);
        }

        #[test]
        fn three_circle_slack_nonnegative(f in poly(10)) {
            prop_assume!(f.l1_norm() > 1e-3);
            let t = three_circle_check(&f, [0.25, 0.5, 0.75], 64, RIGIDITY_TOL).unwrap();
            prop_assert!(t.slack >= -1e-12);
        }

        #[test]
        fn three_circle_slack_scaling(f in poly(10), phase in 0.0f64..TAU, lambda in 0.1f64..10.0) {
            prop_assume!(f.l1_norm() > 1e-3);
            let radii = [0.25, 0.5, 0.75];
            let base = three_circle_check(&f, radii, 64, RIGIDITY_TOL).unwrap();
            let rot = three_circle_check(&f.scale(Complex64::from_polar(1.0, phase)), radii, 64, RIGIDITY_TOL).unwrap();
            let scaled = three_circle_check(&f.scale(c(lambda, 0.0)), radii, 64, RIGIDITY_TOL).unwrap();
            prop_assert!((rot.slack - base.slack).abs() < 1e-12);
            prop_assert!((scaled.slack - base.slack).abs() < 1e-12);
            let shift = lambda.ln() * 3f64.ln();
            prop_assert!((scaled.lhs - base.lhs - shift).abs() < 1e-12);
        }

        #[test]
        fn sup_nondecreasing(f in poly(16), r in 0.05f64..0.9) {
            let a = sup_seminorm(&f, r, 64);
            let b = sup_seminorm(&f, r * 1.05, 64);
            prop_assert!(b >= a - 1e-15 * a);
        }
    }
}
