//! Recovery of an atomic measure in log coordinates from its smoothed
//! moment curve.
//!
//! With `ν = Σ mⱼ δ_{yⱼ}` and `H_u(s) = Σ mⱼ G_u(yⱼ + s)`, the transform
//! factorizes as `Ĥ_u(z) = Ĝ_u(z) · Σ mⱼ e^{i yⱼ z}`. Dividing by `Ĝ_u` away
//! from its zeros leaves an exponential sum whose nodes are the atoms.

pub mod prony;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::AtomicMeasure;
use crate::quadrature::QuadratureSpec;
use crate::theta::{gu_fourier, gu_kernel, ThetaError, ThetaGauge};
use prony::{esprit, levenberg_marquardt, real_amplitudes, ComplexResidual};

/// Slack on `total mass ≤ 1` for fitted measures.
const MASS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid recovery parameters: {0}")]
    InvalidSpec(String),
    #[error("invalid moment data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error("recovery failed: {reason}")]
    RecoveryFailed {
        reason: String,
        candidate: Box<Candidate>,
    },
}

/// Best fit available when recovery is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub log_atoms: Vec<f64>,
    pub masses: Vec<f64>,
    pub residual: f64,
}

/// `ν = Σ mⱼ δ_{yⱼ}` with `yⱼ = ln xⱼ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMeasure {
    log_atoms: Vec<f64>,
    masses: Vec<f64>,
}

impl LogMeasure {
    pub fn new(log_atoms: Vec<f64>, masses: Vec<f64>) -> Result<Self, MeasureError> {
        if log_atoms.len() != masses.len() {
            return Err(MeasureError::InvalidMeasure(format!(
                "{} atoms but {} masses",
                log_atoms.len(),
                masses.len()
            )));
        }
        if log_atoms.iter().any(|y| !y.is_finite()) {
            return Err(MeasureError::InvalidMeasure("atoms must be finite".into()));
        }
        if log_atoms.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MeasureError::InvalidMeasure(
                "atoms must be strictly ascending".into(),
            ));
        }
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(MeasureError::InvalidMeasure("masses must be positive".into()));
        }
        let total: f64 = masses.iter().sum();
        if total > 1.0 + MASS_SLACK {
            return Err(MeasureError::InvalidMeasure(format!(
                "total mass {total} exceeds 1"
            )));
        }
        Ok(Self { log_atoms, masses })
    }

    pub fn dirac(y: f64) -> Self {
        Self {
            log_atoms: vec![y],
            masses: vec![1.0],
        }
    }

    /// Pushes `μ` forward under `x ↦ ln x`.
    pub fn from_atomic(mu: &AtomicMeasure) -> Self {
        Self {
            log_atoms: mu.atoms().iter().map(|x| x.ln()).collect(),
            masses: mu.masses().to_vec(),
        }
    }

    pub fn log_atoms(&self) -> &[f64] {
        &self.log_atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            log_atoms: self.log_atoms.iter().map(|y| y + c).collect(),
            masses: self.masses.clone(),
        }
    }

    /// `ν̂(−z) = Σ mⱼ e^{i yⱼ z}`.
    pub fn transform_conj(&self, z: f64) -> Complex64 {
        self.log_atoms
            .iter()
            .zip(&self.masses)
            .map(|(y, m)| Complex64::from_polar(*m, y * z))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoverySpec {
    /// Shift parameter of the kernel `G_u`.
    pub u: f64,
    /// Sampling window `[s_lo, s_hi]` of the moment data.
    pub window: (f64, f64),
    pub sample_spacing: f64,
    /// Real frequencies, sorted; the exponential-sum fit needs a uniformly
    /// spaced run.
    pub frequency_grid: Vec<f64>,
    /// Frequencies with `|Ĝ_u(z)| < floor · |Ĝ_u(0)|` are skipped.
    pub regularization_floor: f64,
    /// Stricter floor selecting the run used to initialize the fit.
    pub initialization_floor: f64,
    pub rank_tol: f64,
    /// Relative RMS misfit of the factorization above which recovery fails.
    pub residual_tol: f64,
    /// Further shifts whose data is combined with `u` by least squares.
    pub extra_shifts: Vec<f64>,
    pub max_iterations: usize,
    pub quad: QuadratureSpec,
}

impl Default for RecoverySpec {
    fn default() -> Self {
        Self {
            u: 1.0,
            window: (-40.0, 40.0),
            sample_spacing: 1.0 / 32.0,
            frequency_grid: uniform_grid(-8.0, 8.0, 257),
            regularization_floor: 1e-8,
            initialization_floor: 1e-4,
            rank_tol: 1e-8,
            residual_tol: 1e-8,
            extra_shifts: Vec::new(),
            max_iterations: 200,
            quad: QuadratureSpec {
                tolerance: 1e-13,
                ..QuadratureSpec::default()
            },
        }
    }
}

impl RecoverySpec {
    pub fn validate(&self) -> Result<(), MeasureError> {
        let bad = |m: &str| Err(MeasureError::InvalidSpec(m.to_string()));
        if !(self.u > 0.0 && self.u.is_finite()) {
            return bad("u must be positive");
        }
        if self.extra_shifts.iter().any(|u| !(*u > 0.0 && u.is_finite())) {
            return bad("extra shifts must be positive");
        }
        if !(self.window.0 < self.window.1) {
            return bad("window must have positive width");
        }
        if !(self.sample_spacing > 0.0) {
            return bad("sample spacing must be positive");
        }
        if self.frequency_grid.is_empty() {
            return bad("frequency grid is empty");
        }
        if self.frequency_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("frequencies must be strictly increasing");
        }
        if !(self.regularization_floor > 0.0) || !(self.initialization_floor > 0.0) {
            return bad("floors must be positive");
        }
        if !(self.rank_tol > 0.0) || !(self.residual_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    /// All shifts, `u` first.
    pub fn shifts(&self) -> Vec<f64> {
        std::iter::once(self.u)
            .chain(self.extra_shifts.iter().copied())
            .collect()
    }
}

/// `n` equispaced points from `lo` to `hi`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Samples `(s, H_u(s))`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentData {
    pub u: f64,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
}

impl MomentData {
    pub fn validate(&self) -> Result<(), MeasureError> {
        if self.s.len() != self.values.len() {
            return Err(MeasureError::InvalidData("column lengths differ".into()));
        }
        if self.s.len() < 2 {
            return Err(MeasureError::InvalidData("need at least two samples".into()));
        }
        if self.s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MeasureError::InvalidData(
                "sample positions must be strictly increasing".into(),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(MeasureError::InvalidData("non-finite value".into()));
        }
        Ok(())
    }

    /// `Ĥ_u(z) = ∫ H_u(s) e^{−isz} ds` by the trapezoid rule.
    pub fn transform(&self, z: f64) -> Complex64 {
        let n = self.s.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.s[i] - self.s[i - 1] } else { 0.0 };
                let right = if i + 1 < n { self.s[i + 1] - self.s[i] } else { 0.0 };
                Complex64::from_polar(0.5 * (left + right) * self.values[i], -self.s[i] * z)
            })
            .sum()
    }
}

/// `H_u(s) = Σ mⱼ G_u(yⱼ + s)`.
pub fn hu_curve(g: &ThetaGauge, nu: &LogMeasure, u: f64, s: f64) -> Result<f64, MeasureError> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(MeasureError::InvalidSpec(format!("u must be positive, got {u}")));
    }
    Ok(nu
        .log_atoms
        .iter()
        .zip(&nu.masses)
        .map(|(y, m)| m * gu_kernel(g, u, y + s))
        .sum())
}

/// Samples `H_u` on the window of `spec` at its sample spacing.
pub fn sample_moment_data(
    g: &ThetaGauge,
    nu: &LogMeasure,
    u: f64,
    spec: &RecoverySpec,
) -> Result<MomentData, MeasureError> {
    spec.validate()?;
    let (lo, hi) = spec.window;
    let n = ((hi - lo) / spec.sample_spacing).round() as usize + 1;
    let s = uniform_grid(lo, hi, n.max(2));
    let values = s
        .iter()
        .map(|&x| hu_curve(g, nu, u, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MomentData { u, s, values })
}

/// One moment series per shift of `spec`.
pub fn sample_all_shifts(
    g: &ThetaGauge,
    nu: &LogMeasure,
    spec: &RecoverySpec,
) -> Result<Vec<MomentData>, MeasureError> {
    spec.shifts()
        .into_iter()
        .map(|u| sample_moment_data(g, nu, u, spec))
        .collect()
}

/// `Ĝ_u` on `grid`, reusing `Ĝ_u(−z) = conj Ĝ_u(z)`.
pub fn kernel_transforms(
    g: &ThetaGauge,
    u: f64,
    grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<Complex64>, MeasureError> {
    let mut out: Vec<Complex64> = Vec::with_capacity(grid.len());
    for (k, &z) in grid.iter().enumerate() {
        let mirror = grid[..k].iter().position(|w| *w == -z);
        let v = match mirror {
            Some(j) => out[j].conj(),
            None => gu_fourier(g, u, Complex64::new(z, 0.0), quad)?,
        };
        out.push(v);
    }
    Ok(out)
}

/// Output of [`recover_measure`].
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub measure: LogMeasure,
    /// Relative RMS misfit `‖Ĥ − Ĝ ν̂(−·)‖ / ‖Ĥ‖` over the used frequencies.
    pub residual: f64,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub used_frequencies: usize,
    pub skipped_frequencies: usize,
    pub iterations: usize,
}

struct Observation {
    z: f64,
    kernel: Complex64,
    data: Complex64,
}

struct FactorizationModel<'a> {
    obs: &'a [Observation],
    scale: f64,
}

impl FactorizationModel<'_> {
    fn split(params: &[f64]) -> (&[f64], &[f64]) {
        params.split_at(params.len() / 2)
    }
}

impl ComplexResidual for FactorizationModel<'_> {
    fn residuals(&self, params: &[f64]) -> Vec<Complex64> {
        let (ys, ms) = Self::split(params);
        self.obs
            .iter()
            .map(|o| {
                let model: Complex64 = ys
                    .iter()
                    .zip(ms)
                    .map(|(y, m)| Complex64::from_polar(*m, y * o.z))
                    .sum();
                (o.data - o.kernel * model) / self.scale
            })
            .collect()
    }

    fn jacobian(&self, params: &[f64]) -> Vec<Vec<Complex64>> {
        let (ys, ms) = Self::split(params);
        self.obs
            .iter()
            .map(|o| {
                let phases: Vec<Complex64> =
                    ys.iter().map(|y| Complex64::from_polar(1.0, y * o.z)).collect();
                let dy = phases
                    .iter()
                    .zip(ms)
                    .map(|(p, m)| -o.kernel * p * Complex64::new(0.0, m * o.z) / self.scale);
                let dm = phases.iter().map(|p| -o.kernel * p / self.scale);
                dy.chain(dm).collect()
            })
            .collect()
    }
}

/// Recovers `ν` from moment data sampled with `spec.u`.
pub fn recover_measure(
    g: &ThetaGauge,
    data: &MomentData,
    spec: &RecoverySpec,
    atom_budget: usize,
) -> Result<Recovery, MeasureError> {
    let single = RecoverySpec {
        extra_shifts: Vec::new(),
        ..spec.clone()
    };
    recover_measure_multi(g, std::slice::from_ref(data), &single, atom_budget)
}

/// Recovers `ν` from one moment series per shift of `spec`, combining the
/// quotients as `Σ conj(Ĝ_u) Ĥ_u / Σ |Ĝ_u|²`.
pub fn recover_measure_multi(
    g: &ThetaGauge,
    data: &[MomentData],
    spec: &RecoverySpec,
    atom_budget: usize,
) -> Result<Recovery, MeasureError> {
    spec.validate()?;
    let shifts = spec.shifts();
    if data.len() != shifts.len() {
        return Err(MeasureError::InvalidData(format!(
            "expected {} moment series, got {}",
            shifts.len(),
            data.len()
        )));
    }
    for (d, u) in data.iter().zip(&shifts) {
        d.validate()?;
        if (d.u - u).abs() > 1e-12 * u {
            return Err(MeasureError::InvalidData(format!(
                "series generated with u = {}, expected {u}",
                d.u
            )));
        }
    }
    if atom_budget == 0 {
        return Err(MeasureError::InvalidSpec("atom budget must be positive".into()));
    }

    let grid = &spec.frequency_grid;
    let mut kernels = Vec::with_capacity(data.len());
    let mut transforms = Vec::with_capacity(data.len());
    for (d, &u) in data.iter().zip(&shifts) {
        kernels.push(kernel_transforms(g, u, grid, &spec.quad)?);
        transforms.push(grid.iter().map(|&z| d.transform(z)).collect::<Vec<_>>());
    }
    // |Ĝ_u(0)| = u.
    let reference = shifts.iter().map(|u| u * u).sum::<f64>().sqrt();
    let kernel_norm: Vec<f64> = (0..grid.len())
        .map(|k| kernels.iter().map(|ks| ks[k].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let quotient: Vec<Complex64> = (0..grid.len())
        .map(|k| {
            let num: Complex64 = kernels
                .iter()
                .zip(&transforms)
                .map(|(ks, hs)| ks[k].conj() * hs[k])
                .sum();
            num / (kernel_norm[k] * kernel_norm[k])
        })
        .collect();
    let kept: Vec<usize> = (0..grid.len())
        .filter(|&k| kernel_norm[k] >= spec.regularization_floor * reference)
        .collect();
    let skipped = grid.len() - kept.len();

    let run = longest_uniform_run(grid, |k| kernel_norm[k] >= spec.initialization_floor * reference);
    if run.len() < 2 * atom_budget + 1 {
        return Err(MeasureError::InvalidSpec(format!(
            "only {} usable uniformly spaced frequencies for {atom_budget} atoms",
            run.len()
        )));
    }
    let delta = grid[run[1]] - grid[run[0]];
    let samples: Vec<Complex64> = run.iter().map(|&k| quotient[k]).collect();
    let Some(fit) = esprit(&samples, atom_budget, spec.rank_tol) else {
        return Err(failure("no exponential component found", Vec::new(), Vec::new(), f64::INFINITY));
    };
    let obs: Vec<Observation> = kept
        .iter()
        .flat_map(|&k| {
            let kernels = &kernels;
            let transforms = &transforms;
            (0..data.len()).map(move |i| Observation {
                z: grid[k],
                kernel: kernels[i][k],
                data: transforms[i][k],
            })
        })
        .collect();
    let model = FactorizationModel {
        obs: &obs,
        scale: reference,
    };
    let data_norm: f64 = obs.iter().map(|o| o.data.norm_sqr()).sum::<f64>().sqrt();

    // Noise can inflate the numerical rank; spurious terms then come back
    // with nonpositive mass, so lower the rank until every mass is positive.
    let mut rank = fit.rank;
    let (ys, ms, residual, iterations) = loop {
        let nodes = if rank == fit.rank {
            fit.nodes.clone()
        } else {
            match esprit(&samples, rank, 0.0) {
                Some(f) => f.nodes,
                None => break (Vec::new(), Vec::new(), f64::INFINITY, 0),
            }
        };
        let ys: Vec<f64> = nodes.iter().map(|l| l.arg() / delta).collect();
        let basis = DMatrix::from_fn(obs.len(), ys.len(), |r, j| {
            obs[r].kernel * Complex64::from_polar(1.0, ys[j] * obs[r].z)
        });
        let targets: Vec<Complex64> = obs.iter().map(|o| o.data).collect();
        let ms = real_amplitudes(&basis, &targets).unwrap_or_else(|| vec![0.0; ys.len()]);
        let start: Vec<f64> = ys.iter().chain(&ms).copied().collect();
        let lm = levenberg_marquardt(&model, &start, spec.max_iterations);
        let (fy, fm) = lm.params.split_at(ys.len());
        let residual = if data_norm > 0.0 {
            lm.cost.sqrt() * reference / data_norm
        } else {
            f64::INFINITY
        };
        if rank == 1 || fm.iter().all(|m| *m > 0.0) {
            break (fy.to_vec(), fm.to_vec(), residual, lm.iterations);
        }
        rank -= 1;
    };

    let mut pairs: Vec<(f64, f64)> = ys.iter().copied().zip(ms.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (cand_y, cand_m): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();

    let period = 2.0 * std::f64::consts::PI / delta;
    let (atom_lo, atom_hi) = (-spec.window.1, -spec.window.0);
    for &y in &cand_y {
        let aliases = alias_count(y, period, atom_lo, atom_hi);
        if aliases > 1 {
            return Err(failure(
                &format!("atom {y} is indistinguishable from its alias at spacing {period} on this frequency grid"),
                cand_y,
                cand_m,
                residual,
            ));
        }
        if aliases == 0 {
            return Err(failure(&format!("atom {y} lies outside the data window"), cand_y, cand_m, residual));
        }
    }
    if !(residual <= spec.residual_tol) {
        return Err(failure(
            &format!("residual {residual:e} exceeds tolerance {:e}", spec.residual_tol),
            cand_y,
            cand_m,
            residual,
        ));
    }
    let measure = match LogMeasure::new(cand_y.clone(), cand_m.clone()) {
        Ok(m) => m,
        Err(e) => return Err(failure(&e.to_string(), cand_y, cand_m, residual)),
    };
    Ok(Recovery {
        measure,
        residual,
        rank,
        singular_values: fit.singular_values,
        used_frequencies: kept.len(),
        skipped_frequencies: skipped,
        iterations,
    })
}

fn failure(reason: &str, log_atoms: Vec<f64>, masses: Vec<f64>, residual: f64) -> MeasureError {
    MeasureError::RecoveryFailed {
        reason: reason.to_string(),
        candidate: Box::new(Candidate {
            log_atoms,
            masses,
            residual,
        }),
    }
}

/// Number of `y + k·period` inside `[lo, hi]`.
fn alias_count(y: f64, period: f64, lo: f64, hi: f64) -> usize {
    let k_lo = ((lo - y) / period).ceil() as i64;
    let k_hi = ((hi - y) / period).floor() as i64;
    (k_hi - k_lo + 1).max(0) as usize
}

/// Longest run of consecutive accepted indices with constant spacing.
fn longest_uniform_run(grid: &[f64], accept: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for k in 0..grid.len() {
        let uniform = match current.as_slice() {
            [.., a, b] => {
                let step = grid[*b] - grid[*a];
                ((grid[k] - grid[*b]) - step).abs() <= 1e-9 * step
            }
            _ => true,
        };
        let contiguous = current.last().is_none_or(|&last| last + 1 == k);
        if accept(k) && uniform && contiguous {
            current.push(k);
        } else {
            if current.len() > best.len() {
                best = current.clone();
            }
            current = if accept(k) {
                match current.last() {
                    Some(&last) if last + 1 == k => vec![last, k],
                    _ => vec![k],
                }
            } else {
                Vec::new()
            };
        }
    }
    if current.len() > best.len() {
        best = current;
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub max_atom_error: f64,
    pub max_mass_error: f64,
    pub residual: f64,
    /// `|Ĥ_u(0) − total mass · u|`.
    pub zero_frequency_error: f64,
    pub recovered: LogMeasure,
}

/// Forward-simulates `H_u` for `ν`, recovers it, and compares.
pub fn roundtrip_check(
    g: &ThetaGauge,
    nu: &LogMeasure,
    spec: &RecoverySpec,
    atom_budget: usize,
) -> Result<RoundtripReport, MeasureError> {
    spec.validate()?;
    let (lo, hi) = spec.window;
    if let Some(y) = nu.log_atoms.iter().find(|y| !(-**y > lo && -**y < hi)) {
        return Err(MeasureError::InvalidMeasure(format!(
            "atom {y} is not inside the window"
        )));
    }
    let data = sample_all_shifts(g, nu, spec)?;
    let zero_frequency_error = (data[0].transform(0.0).re - nu.total_mass() * spec.u).abs();
    let rec = recover_measure_multi(g, &data, spec, atom_budget)?;
    let (max_atom_error, max_mass_error) = compare(nu, &rec.measure);
    Ok(RoundtripReport {
        max_atom_error,
        max_mass_error,
        residual: rec.residual,
        zero_frequency_error,
        recovered: rec.measure,
    })
}

fn compare(truth: &LogMeasure, found: &LogMeasure) -> (f64, f64) {
    if found.is_empty() {
        return (f64::INFINITY, truth.total_mass());
    }
    if truth.len() == found.len() {
        let atom = truth
            .log_atoms
            .iter()
            .zip(&found.log_atoms)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let mass = truth
            .masses
            .iter()
            .zip(&found.masses)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        return (atom, mass);
    }
    let mut atom: f64 = 0.0;
    let mut mass = (truth.total_mass() - found.total_mass()).abs();
    for (y, m) in truth.log_atoms.iter().zip(&truth.masses) {
        let (j, d) = found
            .log_atoms
            .iter()
            .map(|w| (w - y).abs())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        atom = atom.max(d);
        mass = mass.max((m - found.masses[j]).abs());
    }
    (atom, mass)
}
