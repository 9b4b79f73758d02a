//! Composite Gauss–Legendre quadrature on dyadically refined panels.
//!
//! Every panel is compared against the sum over its two halves; panels whose
//! estimates disagree by more than their share of the tolerance are bisected.
//! The result is summed along the refinement tree, so the summation order
//! depends only on the inputs.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Parameters shared by every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Absolute error budget for the whole integral, tails included.
    pub tolerance: f64,
    /// Maximum number of bisections applied to one initial panel.
    pub max_depth: u32,
    /// Distance kept from the boundary of the strip `|Im z| < alpha` when
    /// evaluating Fourier transforms off the real axis.
    pub strip_margin: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: 16,
            tolerance: 1e-11,
            max_depth: 40,
            strip_margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("panel [{lo}, {hi}] did not converge after {depth} bisections")]
    NonConvergence { lo: f64, hi: f64, depth: u32 },
    #[error("analytic tail bound {bound:e} exceeds the tolerance budget {budget:e}")]
    TailBudget { bound: f64, budget: f64 },
    #[error("invalid quadrature parameters: {0}")]
    InvalidSpec(String),
}

/// Values a quadrature can accumulate.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Default
{
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    /// Sum of the accepted local error estimates.
    pub error: f64,
    pub evaluations: usize,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on the Legendre
    /// three-term recurrence.
    pub fn new(n: usize) -> Result<Self, QuadratureError> {
        if n == 0 {
            return Err(QuadratureError::InvalidSpec(
                "Gauss-Legendre order must be positive".into(),
            ));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess for the i-th largest root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                deriv = dp;
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            if dp.is_finite() {
                deriv = dp;
            }
            let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to `f` on `[a, b]`.
    pub fn panel<T: Integrand, F: Fn(f64) -> T>(&self, f: &F, a: f64, b: f64) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Adaptive integrator bound to one rule and one spec.
#[derive(Debug, Clone)]
pub struct Integrator {
    rule: GaussLegendre,
    spec: QuadratureSpec,
}

impl Integrator {
    pub fn new(spec: QuadratureSpec) -> Result<Self, QuadratureError> {
        if !(spec.tolerance > 0.0) {
            return Err(QuadratureError::InvalidSpec(
                "tolerance must be positive".into(),
            ));
        }
        Ok(Self {
            rule: GaussLegendre::new(spec.order)?,
            spec,
        })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    /// Integrates over consecutive panels `[breaks[i], breaks[i+1]]` with a
    /// total absolute budget `tol`. `breaks` must be sorted; duplicates are
    /// skipped.
    pub fn integrate_panels<T: Integrand, F: Fn(f64) -> T>(
        &self,
        f: &F,
        breaks: &[f64],
        tol: f64,
    ) -> Result<Estimate<T>, QuadratureError> {
        let panels: Vec<(f64, f64)> = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect();
        if panels.is_empty() {
            return Ok(Estimate {
                value: T::default(),
                error: 0.0,
                evaluations: 0,
            });
        }
        let share = tol / panels.len() as f64;
        let mut pieces = Vec::with_capacity(panels.len());
        for (a, b) in panels {
            pieces.push(self.integrate(f, a, b, share)?);
        }
        Ok(pairwise_sum(&pieces))
    }

    /// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
    pub fn integrate<T: Integrand, F: Fn(f64) -> T>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
    ) -> Result<Estimate<T>, QuadratureError> {
        let whole = self.rule.panel(f, a, b);
        self.refine(f, a, b, whole, tol, 0)
    }

    fn refine<T: Integrand, F: Fn(f64) -> T>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        whole: T,
        tol: f64,
        depth: u32,
    ) -> Result<Estimate<T>, QuadratureError> {
        let mid = 0.5 * (a + b);
        let left = self.rule.panel(f, a, mid);
        let right = self.rule.panel(f, mid, b);
        let both = left + right;
        let diff = (both - whole).magnitude();
        // Rounding floor: below this the halves cannot agree any better.
        let floor = 64.0 * f64::EPSILON * both.magnitude();
        let evals = 2 * self.rule.nodes.len();
        if diff <= tol.max(floor) || mid <= a || mid >= b {
            return Ok(Estimate {
                value: both,
                error: diff,
                evaluations: evals,
            });
        }
        if depth >= self.spec.max_depth {
            return Err(QuadratureError::NonConvergence {
                lo: a,
                hi: b,
                depth,
            });
        }
        let l = self.refine(f, a, mid, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(f, mid, b, right, 0.5 * tol, depth + 1)?;
        Ok(Estimate {
            value: l.value + r.value,
            error: l.error + r.error,
            evaluations: evals + l.evaluations + r.evaluations,
        })
    }
}

fn pairwise_sum<T: Integrand>(pieces: &[Estimate<T>]) -> Estimate<T> {
    match pieces.len() {
        0 => Estimate {
            value: T::default(),
            error: 0.0,
            evaluations: 0,
        },
        1 => pieces[0],
        n => {
            let (l, r) = pieces.split_at(n / 2);
            let a = pairwise_sum(l);
            let b = pairwise_sum(r);
            Estimate {
                value: a.value + b.value,
                error: a.error + b.error,
                evaluations: a.evaluations + b.evaluations,
            }
        }
    }
}

/// Sorted, deduplicated union of `base` and the finite points of `extra`
/// lying strictly inside `(lo, hi)`.
pub fn merge_breaks(base: &[f64], extra: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out: Vec<f64> = base.to_vec();
    out.extend(extra.iter().copied().filter(|x| x.is_finite() && *x > lo && *x < hi));
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Geometric breakpoints `lo, 2lo, 4lo, ...` ending exactly at `hi`.
pub fn dyadic_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = vec![lo];
    let mut x = lo;
    while x * 2.0 < hi {
        x *= 2.0;
        out.push(x);
    }
    out.push(hi);
    out
}

/// Equispaced breakpoints of width at most `width` covering `[lo, hi]`.
pub fn uniform_breaks(lo: f64, hi: f64, width: f64) -> Vec<f64> {
    let n = ((hi - lo) / width).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(8).unwrap();
        // Degree 15 is the highest exact degree for 8 points.
        let v: f64 = rule.panel(&|x: f64| x.powi(14), -1.0, 1.0);
        assert!((v - 2.0 / 15.0).abs() < 1e-15);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_order_has_center_node() {
        let rule = GaussLegendre::new(5).unwrap();
        assert_eq!(rule.nodes()[2], 0.0);
        assert!((rule.weights()[2] - 128.0 / 225.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_kink() {
        let q = Integrator::new(QuadratureSpec::default()).unwrap();
        let est = q.integrate(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-12).unwrap();
        assert!((est.value - (0.045 + 0.245)).abs() < 1e-11);
    }

    #[test]
    fn complex_integrand() {
        let q = Integrator::new(QuadratureSpec::default()).unwrap();
        let est = q
            .integrate_panels(
                &|x: f64| Complex64::new(0.0, x).exp(),
                &uniform_breaks(0.0, std::f64::consts::PI, 0.5),
                1e-12,
            )
            .unwrap();
        assert!((est.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn depth_exhaustion_is_an_error() {
        let spec = QuadratureSpec {
            max_depth: 2,
            ..QuadratureSpec::default()
        };
        let q = Integrator::new(spec).unwrap();
        let res = q.integrate(&|x: f64| (1.0 / x).sin(), 1e-6, 1.0, 1e-14);
        assert!(matches!(res, Err(QuadratureError::NonConvergence { .. })));
    }

    #[test]
    fn dyadic_breaks_end_at_hi() {
        let b = dyadic_breaks(1.0, 10.0);
        assert_eq!(b, vec![1.0, 2.0, 4.0, 8.0, 10.0]);
    }
}
