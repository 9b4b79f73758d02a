//! Isometries of the sampled Fréchet space `C(U)`: weighted compositions,
//! the grid isometry test, recovery of `(h, φ)` from an opaque map, and the
//! pointwise functional bound behind the decomposition `Φ(z)(f) = h̄ T(f)(z)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::maps::PointMap;
use super::{sup_seminorm_grid, ContError, Grid, GridFunction};

/// Interpolation budget, in grid cells times the probe's Lipschitz estimate.
pub const BUDGET_CELLS: f64 = 2.0;
pub const UNIMODULAR_TOL: f64 = 1e-10;
/// Distance a recovered image may stray outside its level.
pub const CONTAINMENT_TOL: f64 = 1e-9;

pub trait GridMap {
    fn apply(&self, f: &GridFunction) -> Result<GridFunction, ContError>;
}

impl<F: Fn(&GridFunction) -> Result<GridFunction, ContError>> GridMap for F {
    fn apply(&self, f: &GridFunction) -> Result<GridFunction, ContError> {
        self(f)
    }
}

/// `f ↦ h · (f ∘ φ)` with the images `φ(node)` precomputed.
#[derive(Debug, Clone)]
pub struct WeightedComposition {
    h: GridFunction,
    images: Vec<Complex64>,
}

impl WeightedComposition {
    pub fn new(h: GridFunction, phi: &dyn PointMap) -> Result<Self, ContError> {
        let grid = Arc::clone(h.grid());
        let images: Vec<Complex64> = grid.points().iter().map(|z| phi.map(*z)).collect();
        if let Some(w) = images.iter().find(|w| grid.index_coords(**w).is_err()) {
            return Err(ContError::OutsideDomain(*w));
        }
        Ok(Self { h, images })
    }

    pub fn h(&self) -> &GridFunction {
        &self.h
    }

    pub fn images(&self) -> &[Complex64] {
        &self.images
    }
}

impl GridMap for WeightedComposition {
    fn apply(&self, f: &GridFunction) -> Result<GridFunction, ContError> {
        if !f.same_grid(&self.h) {
            return Err(ContError::GridMismatch);
        }
        let values = self
            .images
            .iter()
            .zip(self.h.values())
            .map(|(w, h)| Ok(h * f.interpolate(*w)?))
            .collect::<Result<Vec<_>, ContError>>()?;
        GridFunction::new(Arc::clone(f.grid()), values)
    }
}

pub fn weighted_composition_grid(
    h: &GridFunction,
    phi: &dyn PointMap,
    f: &GridFunction,
) -> Result<GridFunction, ContError> {
    WeightedComposition::new(h.clone(), phi)?.apply(f)
}

fn budget(f: &GridFunction) -> f64 {
    BUDGET_CELLS * f.lipschitz_estimate() * f.grid().cell_size()
}

fn apply_checked(t: &dyn GridMap, f: &GridFunction) -> Result<GridFunction, ContError> {
    let g = t.apply(f)?;
    if !g.same_grid(f) {
        return Err(ContError::GridMismatch);
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridIsometryReport {
    /// Largest `|‖Tf‖ₙ − ‖f‖ₙ|` per level.
    pub level_gaps: Vec<f64>,
    pub max_gap: f64,
    /// Level and probe with the largest gap beyond its allowance.
    pub worst_level: usize,
    pub worst_probe: usize,
    /// Allowance of the worst case: tolerance plus interpolation budget.
    pub allowance: f64,
    pub passed: bool,
}

/// Compares `‖T f‖_{∞,n}` with `‖f‖_{∞,n}` for every probe and level; a gap
/// passes if it is within `tol · max(1, ‖f‖ₙ)` plus the interpolation budget.
pub fn isometry_test_grid(
    t: &dyn GridMap,
    probes: &[GridFunction],
    tol: f64,
) -> Result<GridIsometryReport, ContError> {
    let first = probes
        .first()
        .ok_or_else(|| ContError::InvalidParameter("no probes".into()))?;
    let levels = first.grid().levels();
    let mut level_gaps = vec![0.0f64; levels];
    let mut worst = (f64::NEG_INFINITY, 0, 0, 0.0);
    for (p, f) in probes.iter().enumerate() {
        if !f.same_grid(first) {
            return Err(ContError::GridMismatch);
        }
        let g = apply_checked(t, f)?;
        let b = budget(f);
        for (n, slot) in level_gaps.iter_mut().enumerate() {
            let fs = sup_seminorm_grid(f, n)?;
            let gap = (sup_seminorm_grid(&g, n)? - fs).abs();
            *slot = slot.max(gap);
            let allowance = tol * fs.max(1.0) + b;
            if gap - allowance > worst.0 {
                worst = (gap - allowance, n, p, allowance);
            }
        }
    }
    Ok(GridIsometryReport {
        max_gap: level_gaps.iter().copied().fold(0.0, f64::max),
        level_gaps,
        worst_level: worst.1,
        worst_probe: worst.2,
        allowance: worst.3,
        passed: worst.0 <= 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecoveryCheck {
    Unimodular,
    Containment,
    Surjectivity,
    Injectivity,
    Reconstruction,
}

impl RecoveryCheck {
    pub fn key(self) -> &'static str {
        match self {
            Self::Unimodular => "unimodular",
            Self::Containment => "containment",
            Self::Surjectivity => "surjectivity",
            Self::Injectivity => "injectivity",
            Self::Reconstruction => "reconstruction",
        }
    }
}

impl fmt::Display for RecoveryCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub check: RecoveryCheck,
    pub passed: bool,
    pub residual: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecoveryCertificate {
    pub checks: Vec<CheckRecord>,
}

impl RecoveryCertificate {
    pub fn check(&self, name: RecoveryCheck) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == name)
    }
}

#[derive(Debug, Clone)]
pub struct RecoveredPair {
    /// `T(𝟙)`.
    pub h: GridFunction,
    /// `conj(h) · T(e₁)` at every node.
    pub phi: Vec<Complex64>,
    pub certificate: RecoveryCertificate,
}

fn distance_outside(grid: &Grid, z: Complex64, level: usize) -> f64 {
    match grid.domain() {
        super::Domain::Interval(e) => {
            let (a, b) = e.intervals()[level];
            (a - z.re).max(z.re - b).max(0.0) + z.im.abs()
        }
        super::Domain::Disc(e) => (z.norm() - e.radii()[level]).max(0.0),
    }
}

/// Signed difference of angular indices, wrapped to `[−m/2, m/2)`.
fn angular_delta(a: f64, b: f64, m: f64) -> f64 {
    (a - b + 0.5 * m).rem_euclid(m) - 0.5 * m
}

struct Coverage {
    uncovered: usize,
    example: Option<usize>,
}

/// Marks every node within one cell (in grid coordinates) of the image of a
/// cell of `K_level`, then counts the nodes of `K_level` left unmarked.
fn coverage(grid: &Grid, coords: &[(f64, f64)], level: usize) -> Coverage {
    let rows = grid.rows();
    let mut covered = vec![false; grid.len()];
    match grid.angles() {
        None => {
            for k in 0..rows - 1 {
                if !(grid.in_level(k, level) && grid.in_level(k + 1, level)) {
                    continue;
                }
                let (u0, u1) = (coords[k].0, coords[k + 1].0);
                let lo = (u0.min(u1) - 1.0).ceil().max(0.0) as usize;
                let hi = ((u0.max(u1) + 1.0).floor() as usize).min(rows - 1);
                for c in &mut covered[lo..=hi] {
                    *c = true;
                }
            }
        }
        Some(m) => {
            let mf = m as f64;
            for i in 0..rows - 1 {
                for j in 0..m {
                    let corners = [i * m + j, i * m + (j + 1) % m, (i + 1) * m + j, (i + 1) * m + (j + 1) % m];
                    if !corners.iter().all(|k| grid.in_level(*k, level)) {
                        continue;
                    }
                    let rs = corners.map(|k| coords[k].0);
                    let rlo = rs.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
                    let rhi = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
                    let off_centre: Vec<f64> = corners
                        .iter()
                        .filter(|k| coords[**k].0 > 1e-9)
                        .map(|k| coords[*k].1)
                        .collect();
                    let (tlo, thi) = match off_centre.first() {
                        None => (0.0, mf),
                        Some(&t0) => {
                            let ts: Vec<f64> = off_centre.iter().map(|t| t0 + angular_delta(*t, t0, mf)).collect();
                            (
                                ts.iter().copied().fold(f64::INFINITY, f64::min) - 1.0,
                                ts.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0,
                            )
                        }
                    };
                    let i_lo = rlo.ceil().max(0.0) as usize;
                    let i_hi = (rhi.floor().max(0.0) as usize).min(rows - 1);
                    for ii in i_lo..=i_hi {
                        if ii == 0 {
                            for c in &mut covered[0..m] {
                                *c = true;
                            }
                            continue;
                        }
                        let (jlo, jhi) = (tlo.ceil() as i64, thi.floor() as i64);
                        for jj in jlo..=jhi.min(jlo + m as i64 - 1) {
                            covered[ii * m + jj.rem_euclid(m as i64) as usize] = true;
                        }
                    }
                }
            }
        }
    }
    let missing: Vec<usize> = (0..grid.len())
        .filter(|k| grid.in_level(*k, level) && !covered[*k])
        .collect();
    Coverage {
        uncovered: missing.len(),
        example: missing.first().copied(),
    }
}

struct Collisions {
    close_pairs: usize,
    example: Option<(usize, usize)>,
    reversed_cells: usize,
}

/// Non-adjacent nodes whose images lie within half a cell of each other, and
/// cells whose image has the minority orientation.
fn collisions(grid: &Grid, images: &[Complex64], coords: &[(f64, f64)]) -> Collisions {
    let period = grid.angles().map(|m| m as f64);
    let key = |(r, t): (f64, f64)| ((2.0 * r).floor() as i64, (2.0 * t).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, c) in coords.iter().enumerate() {
        buckets.entry(key(*c)).or_default().push(k);
    }
    let t_buckets = period.map(|m| 2 * m as i64);
    let mut close_pairs = 0;
    let mut example = None;
    let centre = |k: usize| grid.angles().is_some_and(|m| k < m);
    for (p, cp) in coords.iter().enumerate() {
        let (br, bt) = key(*cp);
        for dr in -1..=1 {
            for dt in -1..=1 {
                let mut t = bt + dt;
                if let Some(nb) = t_buckets {
                    t = t.rem_euclid(nb);
                }
                let Some(list) = buckets.get(&(br + dr, t)) else {
                    continue;
                };
                for &q in list.iter().filter(|q| **q > p) {
                    let cq = coords[q];
                    let dtheta = match period {
                        Some(m) => angular_delta(cp.1, cq.1, m),
                        None => 0.0,
                    };
                    if (cp.0 - cq.0).abs() < 0.5
                        && dtheta.abs() < 0.5
                        && !grid.adjacent(p, q)
                        && !(centre(p) && centre(q))
                    {
                        close_pairs += 1;
                        example.get_or_insert((p, q));
                    }
                }
            }
        }
    }
    let areas: Vec<f64> = match grid.angles() {
        None => images.windows(2).map(|w| w[1].re - w[0].re).collect(),
        Some(m) => {
            let rows = grid.rows();
            let mut out = Vec::with_capacity((rows - 1) * m);
            for i in 0..rows - 1 {
                for j in 0..m {
                    let quad = [
                        images[i * m + j],
                        images[i * m + (j + 1) % m],
                        images[(i + 1) * m + (j + 1) % m],
                        images[(i + 1) * m + j],
                    ];
                    let twice: f64 = (0..4)
                        .map(|a| {
                            let (u, v) = (quad[a], quad[(a + 1) % 4]);
                            u.re * v.im - u.im * v.re
                        })
                        .sum();
                    out.push(twice);
                }
            }
            out
        }
    };
    let positive = areas.iter().filter(|a| **a > 0.0).count();
    let negative = areas.iter().filter(|a| **a < 0.0).count();
    Collisions {
        close_pairs,
        example,
        reversed_cells: areas.len() - positive.max(negative),
    }
}

/// Recovers `h = T(𝟙)` and `φ = conj(h) T(e₁)` from an opaque map and
/// certifies a weighted composition. Checks run in order (unimodularity,
/// containment `φ(Kₙ) ⊆ Kₙ`, surjectivity onto each `Kₙ`, injectivity,
/// reconstruction on `probes`); the first failure aborts.
pub fn recover_h_phi(
    t: &dyn GridMap,
    grid: &Arc<Grid>,
    probes: &[GridFunction],
) -> Result<RecoveredPair, ContError> {
    let mut cert = RecoveryCertificate::default();
    let fail = |cert: &mut RecoveryCertificate, check, residual, detail: String| {
        cert.checks.push(CheckRecord {
            check,
            passed: false,
            residual,
            detail: detail.clone(),
        });
        Err(ContError::NotWeightedComposition {
            check,
            detail,
            certificate: Box::new(cert.clone()),
        })
    };
    let pass = |cert: &mut RecoveryCertificate, check, residual, detail: String| {
        cert.checks.push(CheckRecord {
            check,
            passed: true,
            residual,
            detail,
        })
    };

    let h = apply_checked(t, &GridFunction::one(grid))?;
    let uni = h.values().iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    if uni > UNIMODULAR_TOL {
        return fail(&mut cert, RecoveryCheck::Unimodular, uni, format!("max ||h| - 1| = {uni:e}"));
    }
    pass(&mut cert, RecoveryCheck::Unimodular, uni, String::new());

    let te1 = apply_checked(t, &GridFunction::coordinate(grid))?;
    let phi: Vec<Complex64> = h.values().iter().zip(te1.values()).map(|(h, v)| h.conj() * v).collect();
    let mut outside = 0.0f64;
    let mut offender = None;
    for (k, w) in phi.iter().enumerate() {
        let d = distance_outside(grid, *w, grid.node_level(k));
        if d > outside {
            outside = d;
            offender = Some(k);
        }
    }
    if outside > CONTAINMENT_TOL {
        let k = offender.expect("set with the maximum");
        return fail(
            &mut cert,
            RecoveryCheck::Containment,
            outside,
            format!("node {} of level {} maps {outside:e} outside it", grid.points()[k], grid.node_level(k)),
        );
    }
    pass(&mut cert, RecoveryCheck::Containment, outside, String::new());

    let coords = phi
        .iter()
        .map(|w| grid.index_coords(*w))
        .collect::<Result<Vec<_>, _>>()?;
    for level in 0..grid.levels() {
        let cov = coverage(grid, &coords, level);
        if cov.uncovered > 0 {
            let k = cov.example.expect("some node uncovered");
            return fail(
                &mut cert,
                RecoveryCheck::Surjectivity,
                cov.uncovered as f64,
                format!("{} nodes of level {level} missed, e.g. {}", cov.uncovered, grid.points()[k]),
            );
        }
    }
    pass(&mut cert, RecoveryCheck::Surjectivity, 0.0, String::new());

    let col = collisions(grid, &phi, &coords);
    if col.close_pairs > 0 || col.reversed_cells > 0 {
        let detail = match col.example {
            Some((p, q)) => format!(
                "{} close pairs, {} reversed cells, e.g. {} and {}",
                col.close_pairs,
                col.reversed_cells,
                grid.points()[p],
                grid.points()[q]
            ),
            None => format!("{} reversed cells", col.reversed_cells),
        };
        return fail(
            &mut cert,
            RecoveryCheck::Injectivity,
            (col.close_pairs + col.reversed_cells) as f64,
            detail,
        );
    }
    pass(&mut cert, RecoveryCheck::Injectivity, 0.0, String::new());

    let mut worst = 0.0f64;
    for f in probes {
        let tf = apply_checked(t, f)?;
        let allowance = UNIMODULAR_TOL * 10.0 + budget(f);
        for ((tv, w), hv) in tf.values().iter().zip(&phi).zip(h.values()) {
            let gap = (tv - hv * f.interpolate(*w)?).norm();
            worst = worst.max(gap / allowance);
        }
    }
    if worst > 1.0 {
        return fail(
            &mut cert,
            RecoveryCheck::Reconstruction,
            worst,
            format!("T f differs from h (f ∘ φ) by {worst:.3} budgets"),
        );
    }
    pass(&mut cert, RecoveryCheck::Reconstruction, worst, String::new());

    Ok(RecoveredPair {
        h,
        phi,
        certificate: cert,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub unimodular_residual: f64,
    /// Smallest `‖f‖_{∞,n(z)} − |Φ(z)(f)|` over probes and nodes, with `n(z)`
    /// the smallest level containing `z`.
    pub worst_slack: f64,
    /// Largest `|Φ(z)(f)| / ‖f‖_{∞,n(z)}`: a sampled dual-norm estimate.
    pub dual_norm: f64,
    /// `max |Φ(z)(a f + b g) − a Φ(z)(f) − b Φ(z)(g)|`, relative.
    pub linearity_residual: f64,
    /// Largest jump of `z ↦ Φ(z)(f)` between neighbouring nodes relative to
    /// `‖f‖` on the outer level.
    pub adjacent_jump: f64,
    pub nodes_checked: usize,
    pub passed: bool,
}

/// Checks `|Φ(z)(f)| ≤ ‖f‖_{∞,n(z)}` up to the interpolation budget at every
/// node for every probe, with `Φ(z)(f) = conj(h(z)) T(f)(z)` and `h = T(𝟙)`.
pub fn decomposition_bound_check(
    t: &dyn GridMap,
    probes: &[GridFunction],
    tol: f64,
) -> Result<DecompositionReport, ContError> {
    let first = probes
        .first()
        .ok_or_else(|| ContError::InvalidParameter("no probes".into()))?;
    let grid = Arc::clone(first.grid());
    let h = apply_checked(t, &GridFunction::one(&grid))?;
    let unimodular_residual = h.values().iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    let phi_of = |tf: &GridFunction| -> Vec<Complex64> {
        tf.values().iter().zip(h.values()).map(|(v, h)| h.conj() * v).collect()
    };
    let outer = grid.levels() - 1;
    let mut worst_slack = f64::INFINITY;
    let mut dual_norm = 0.0f64;
    let mut adjacent_jump = 0.0f64;
    let mut bound_ok = true;
    let pairs = grid.neighbour_pairs();
    let mut images = Vec::with_capacity(probes.len());
    for f in probes {
        if !f.same_grid(first) {
            return Err(ContError::GridMismatch);
        }
        let phi = phi_of(&apply_checked(t, f)?);
        let sups = (0..grid.levels())
            .map(|n| sup_seminorm_grid(f, n))
            .collect::<Result<Vec<_>, _>>()?;
        let b = budget(f);
        for (k, v) in phi.iter().enumerate() {
            let bound = sups[grid.node_level(k)];
            let slack = bound - v.norm();
            worst_slack = worst_slack.min(slack);
            if bound > 0.0 {
                dual_norm = dual_norm.max(v.norm() / bound);
            }
            if slack < -(tol * bound.max(1.0) + b) {
                bound_ok = false;
            }
        }
        if sups[outer] > 0.0 {
            let jump = pairs.iter().map(|(k, l)| (phi[*k] - phi[*l]).norm()).fold(0.0, f64::max);
            adjacent_jump = adjacent_jump.max(jump / sups[outer]);
        }
        images.push(phi);
    }
    let mut linearity_residual = 0.0;
    if probes.len() >= 2 {
        let (a, b) = (Complex64::new(0.6, -0.3), Complex64::new(-1.1, 0.4));
        let mix = probes[0].combine(a, &probes[1], b)?;
        let phi_mix = phi_of(&apply_checked(t, &mix)?);
        let scale = (a.norm() * sup_seminorm_grid(&probes[0], outer)?
            + b.norm() * sup_seminorm_grid(&probes[1], outer)?)
        .max(1.0);
        linearity_residual = phi_mix
            .iter()
            .zip(images[0].iter().zip(&images[1]))
            .map(|(m, (p, q))| (m - a * p - b * q).norm())
            .fold(0.0, f64::max)
            / scale;
    }
    Ok(DecompositionReport {
        unimodular_residual,
        worst_slack,
        dual_norm,
        linearity_residual,
        adjacent_jump,
        nodes_checked: grid.len() * probes.len(),
        passed: bound_ok && unimodular_residual <= UNIMODULAR_TOL && linearity_residual <= 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::super::maps::{build_annulus_homeo, build_interval_homeo, zigzag_fold, AnnulusDeformation, Orientation};
    use super::super::probes::{probe_functions, random_unimodular};
    use super::super::{Exhaustion1D, ExhaustionDisc};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn interval_setup() -> (Arc<Grid>, Vec<GridFunction>) {
        let g = Grid::interval_default(&Exhaustion1D::standard());
        let probes = probe_functions(&g, 6, &mut ChaCha8Rng::seed_from_u64(3));
        (g, probes)
    }

    fn identity(f: &GridFunction) -> Result<GridFunction, ContError> {
        Ok(f.clone())
    }

    #[test]
    fn identity_is_isometry_and_tight() {
        let (_, probes) = interval_setup();
        let rep = isometry_test_grid(&identity, &probes, 1e-12).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.max_gap, 0.0);
        let dec = decomposition_bound_check(&identity, &probes, 1e-12).unwrap();
        assert!(dec.passed);
        assert_eq!(dec.worst_slack, 0.0);
        assert_eq!(dec.dual_norm, 1.0);
    }

    #[test]
    fn zero_map_fails() {
        let (g, probes) = interval_setup();
        let zero = |f: &GridFunction| Ok(GridFunction::constant(f.grid(), Complex64::new(0.0, 0.0)));
        assert!(!isometry_test_grid(&zero, &probes, 1e-12).unwrap().passed);
        let err = recover_h_phi(&zero, &g, &probes).unwrap_err();
        assert!(matches!(err, ContError::NotWeightedComposition { check: RecoveryCheck::Unimodular, .. }));
    }

    #[test]
    fn non_unimodular_weight_fails_where_it_peaks() {
        let (g, probes) = interval_setup();
        let h = GridFunction::from_fn(&g, |z| Complex64::new(1.0 + 0.5 * (z.re - 0.5).abs(), 0.0));
        let t = WeightedComposition::new(h, &|z: Complex64| z).unwrap();
        let rep = isometry_test_grid(&t, &probes, 1e-12).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.worst_level, 3);
    }

    #[test]
    fn decreasing_homeo_recovered() {
        let (g, probes) = interval_setup();
        let exh = Exhaustion1D::standard();
        let phi = build_interval_homeo(&exh, Orientation::Decreasing, &[(0.5, 0.5)]).unwrap();
        let h = random_unimodular(&g, &mut ChaCha8Rng::seed_from_u64(9));
        let t = WeightedComposition::new(h.clone(), &phi).unwrap();
        assert!(isometry_test_grid(&t, &probes, 1e-12).unwrap().passed);
        let rec = recover_h_phi(&t, &g, &probes).unwrap();
        for (a, b) in rec.h.values().iter().zip(h.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        for &(a, b) in exh.intervals() {
            let k = g.points().iter().position(|p| p.re == a).unwrap();
            assert!((rec.phi[k].re - b).abs() < 1e-12);
        }
        let dec = decomposition_bound_check(&t, &probes, 1e-12).unwrap();
        assert!(dec.passed);
    }

    #[test]
    fn zigzag_is_isometry_but_not_injective() {
        let (g, probes) = interval_setup();
        let zig = zigzag_fold(&Exhaustion1D::standard());
        let t = WeightedComposition::new(GridFunction::one(&g), &zig).unwrap();
        assert!(isometry_test_grid(&t, &probes, 1e-12).unwrap().passed);
        match recover_h_phi(&t, &g, &probes) {
            Err(ContError::NotWeightedComposition { check, certificate, .. }) => {
                assert_eq!(check, RecoveryCheck::Injectivity);
                assert!(certificate.check(RecoveryCheck::Surjectivity).unwrap().passed);
            }
            other => panic!("unexpected {other:?}"),
        }
        let dec = decomposition_bound_check(&t, &probes, 1e-12).unwrap();
        assert!(dec.passed && dec.worst_slack >= 0.0);
    }

    #[test]
    fn non_surjective_map_caught() {
        let (g, probes) = interval_setup();
        let exh = Exhaustion1D::standard();
        let squash = |z: Complex64| {
            let (a, b) = exh.intervals()[0];
            if z.re >= a && z.re <= b {
                Complex64::new(a + (z.re - a) * 0.5, 0.0)
            } else {
                z
            }
        };
        let t = WeightedComposition::new(GridFunction::one(&g), &squash).unwrap();
        let err = recover_h_phi(&t, &g, &probes).unwrap_err();
        assert!(matches!(err, ContError::NotWeightedComposition { check: RecoveryCheck::Surjectivity, .. }));
    }

    #[test]
    fn twisted_disc_recovered() {
        let exh = ExhaustionDisc::standard();
        let g = Grid::disc_default(&exh);
        let probes = probe_functions(&g, 3, &mut ChaCha8Rng::seed_from_u64(5));
        let phi = build_annulus_homeo(&exh, &[AnnulusDeformation::half_turn(&exh)]).unwrap();
        let h = random_unimodular(&g, &mut ChaCha8Rng::seed_from_u64(6));
        let t = WeightedComposition::new(h, &phi).unwrap();
        assert!(isometry_test_grid(&t, &probes, 1e-12).unwrap().passed);
        let rec = recover_h_phi(&t, &g, &probes).unwrap();
        assert!(rec.certificate.checks.iter().all(|c| c.passed));
        assert!(decomposition_bound_check(&t, &probes, 1e-12).unwrap().passed);
    }

    #[test]
    fn disc_fold_caught() {
        let exh = ExhaustionDisc::standard();
        let g = Grid::disc(&exh, 64, 128).unwrap();
        let probes = probe_functions(&g, 2, &mut ChaCha8Rng::seed_from_u64(5));
        let fold = |z: Complex64| if z.norm() >= 0.25 && z.norm() <= 0.8 { z.conj() } else { z };
        let t = WeightedComposition::new(GridFunction::one(&g), &fold).unwrap();
        let err = recover_h_phi(&t, &g, &probes).unwrap_err();
        assert!(matches!(err, ContError::NotWeightedComposition { check: RecoveryCheck::Injectivity, .. }));
    }
}
