//! Exponential-sum fitting: ESPRIT for the nodes of `cₖ = Σ aⱼ λⱼᵏ`, linear
//! least squares for the amplitudes, and a Levenberg–Marquardt polish of a
//! real-parameter model against complex observations.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

/// Nodes recovered from a uniformly sampled exponential sum.
#[derive(Debug, Clone)]
pub struct EspritFit {
    pub nodes: Vec<Complex64>,
    /// Hankel singular values in decreasing order.
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Estimates the number of terms (singular values above `rank_tol · σ₀`,
/// capped at `max_rank`) and their nodes `λⱼ`.
pub fn esprit(samples: &[Complex64], max_rank: usize, rank_tol: f64) -> Option<EspritFit> {
    let n = samples.len();
    if n < 3 || max_rank == 0 {
        return None;
    }
    let rows = n / 2;
    let cols = n - rows + 1;
    let hankel = DMatrix::from_fn(rows, cols, |i, j| samples[i + j]);
    let svd = hankel.svd(true, false);
    let u = svd.u?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let top = *singular_values.first()?;
    if !(top > 0.0) {
        return None;
    }
    let rank = singular_values
        .iter()
        .take_while(|s| **s > rank_tol * top)
        .count()
        .min(max_rank)
        .min(rows - 1);
    if rank == 0 {
        return None;
    }
    let signal = DMatrix::from_fn(rows, rank, |i, k| u[(i, order[k])]);
    let upper = signal.rows(0, rows - 1).into_owned();
    let lower = signal.rows(1, rows - 1).into_owned();
    let phi = upper.svd(true, true).solve(&lower, 0.0).ok()?;
    let (_, t) = Schur::new(phi).unpack();
    let nodes = (0..rank).map(|k| t[(k, k)]).collect();
    Some(EspritFit {
        nodes,
        singular_values,
        rank,
    })
}

/// Real amplitudes minimizing `Σₖ |cₖ − Σⱼ aⱼ Vₖⱼ|²`.
pub fn real_amplitudes(basis: &DMatrix<Complex64>, samples: &[Complex64]) -> Option<Vec<f64>> {
    let (n, k) = basis.shape();
    let stacked = DMatrix::from_fn(2 * n, k, |i, j| {
        let v = basis[(i % n, j)];
        if i < n {
            v.re
        } else {
            v.im
        }
    });
    let rhs = DVector::from_fn(2 * n, |i, _| {
        if i < n {
            samples[i].re
        } else {
            samples[i - n].im
        }
    });
    let sol = stacked.svd(true, true).solve(&rhs, 0.0).ok()?;
    Some(sol.iter().copied().collect())
}

/// Model interface for [`levenberg_marquardt`]: complex residuals and their
/// derivatives with respect to real parameters.
pub trait ComplexResidual {
    fn residuals(&self, params: &[f64]) -> Vec<Complex64>;
    /// `jac[k][p] = ∂rₖ/∂paramsₚ`.
    fn jacobian(&self, params: &[f64]) -> Vec<Vec<Complex64>>;
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
}

fn cost(r: &[Complex64]) -> f64 {
    r.iter().map(|c| c.norm_sqr()).sum()
}

pub fn levenberg_marquardt<M: ComplexResidual>(
    model: &M,
    start: &[f64],
    max_iter: usize,
) -> LmOutcome {
    let np = start.len();
    let mut params = start.to_vec();
    let mut res = model.residuals(&params);
    let mut current = cost(&res);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < max_iter && current > 0.0 {
        iterations += 1;
        let jac = model.jacobian(&params);
        let mut jtj = DMatrix::<f64>::zeros(np, np);
        let mut jtr = DVector::<f64>::zeros(np);
        for (row, r) in jac.iter().zip(&res) {
            for p in 0..np {
                jtr[p] += row[p].re * r.re + row[p].im * r.im;
                for q in 0..=p {
                    let v = row[p].re * row[q].re + row[p].im * row[q].im;
                    jtj[(p, q)] += v;
                    if p != q {
                        jtj[(q, p)] += v;
                    }
                }
            }
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = jtj.clone();
            for p in 0..np {
                damped[(p, p)] += lambda * jtj[(p, p)].max(1e-300);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&jtr));
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_res = model.residuals(&trial);
            let trial_cost = cost(&trial_res);
            if trial_cost < current {
                let rel = (current - trial_cost) / current;
                params = trial;
                res = trial_res;
                current = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    LmOutcome {
        params,
        cost: current,
        iterations,
    }
}
