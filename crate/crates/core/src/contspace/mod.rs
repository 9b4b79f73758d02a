//! Grid model of continuous functions on `(0, 1)` and on the unit disc,
//! with their compact exhaustions and sup seminorms.

pub mod banach;
pub mod maps;
pub mod probes;

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

pub use banach::{
    decomposition_bound_check, isometry_test_grid, recover_h_phi, weighted_composition_grid,
    CheckRecord, DecompositionReport, GridIsometryReport, GridMap, RecoveredPair,
    RecoveryCertificate, RecoveryCheck, WeightedComposition,
};
pub use maps::{
    build_annulus_homeo, build_interval_homeo, zigzag_fold, AnnulusDeformation, AnnulusHomeo,
    Orientation, PiecewiseLinearHomeo, PiecewiseLinearMap, PointMap,
};

/// Default equispaced nodes of the interval grid.
pub const INTERVAL_NODES: usize = 4096;
/// Default radii and angles of the polar disc grid.
pub const DISC_RADII: usize = 256;
pub const DISC_ANGLES: usize = 512;

/// Slack on level membership and on the domain boundary.
const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContError {
    #[error("invalid exhaustion: {0}")]
    InvalidExhaustion(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("map is not strictly monotone at breakpoint {0}")]
    MonotonicityViolation(usize),
    #[error("circle of radius {radius} is not preserved (deviation {deviation:e})")]
    CircleViolation { radius: f64, deviation: f64 },
    #[error("twist profile is discontinuous at radius {0}")]
    Discontinuous(f64),
    #[error("point {0} lies outside the grid domain")]
    OutsideDomain(Complex64),
    #[error("level {0} is not resolved by the grid")]
    UnresolvedLevel(usize),
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not a weighted composition: {check} check failed ({detail})")]
    NotWeightedComposition {
        check: RecoveryCheck,
        detail: String,
        certificate: Box<RecoveryCertificate>,
    },
}

/// Nested intervals `[aₙ, bₙ]` exhausting `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Exhaustion1D {
    intervals: Vec<(f64, f64)>,
}

impl Exhaustion1D {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self, ContError> {
        let bad = |m: &str| Err(ContError::InvalidExhaustion(m.to_string()));
        if intervals.is_empty() {
            return bad("no levels");
        }
        for &(a, b) in &intervals {
            if !(0.0 < a && a <= b && b < 1.0) {
                return bad("need 0 < aₙ ≤ bₙ < 1");
            }
        }
        for w in intervals.windows(2) {
            if !(w[1].0 < w[0].0 && w[1].1 > w[0].1) {
                return bad("levels must be strictly nested");
            }
        }
        Ok(Self { intervals })
    }

    /// `[1/5, 4/5] ⊂ [1/10, 9/10] ⊂ [1/20, 19/20] ⊂ [1/40, 39/40]`.
    pub fn standard() -> Self {
        Self {
            intervals: vec![(0.2, 0.8), (0.1, 0.9), (0.05, 0.95), (0.025, 0.975)],
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn levels(&self) -> usize {
        self.intervals.len()
    }

    pub fn outer(&self) -> (f64, f64) {
        *self.intervals.last().expect("nonempty")
    }

    /// All `aₙ` and `bₙ`, ascending.
    pub fn bounds(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.intervals.iter().flat_map(|(a, b)| [*a, *b]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Nested discs `rₙ𝔻`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustionDisc {
    radii: Vec<f64>,
}

impl ExhaustionDisc {
    pub fn new(radii: Vec<f64>) -> Result<Self, ContError> {
        if radii.is_empty() {
            return Err(ContError::InvalidExhaustion("no levels".into()));
        }
        if radii.iter().any(|r| !(*r >= 0.0 && *r < 1.0)) {
            return Err(ContError::InvalidExhaustion("radii must lie in [0, 1)".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ContError::InvalidExhaustion("radii must be strictly increasing".into()));
        }
        Ok(Self { radii })
    }

    /// `K₀ = ¼𝔻`, `K₁ = ⅘𝔻`.
    pub fn standard() -> Self {
        Self {
            radii: vec![0.25, 0.8],
        }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn levels(&self) -> usize {
        self.radii.len()
    }

    pub fn outer(&self) -> f64 {
        *self.radii.last().expect("nonempty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval(Exhaustion1D),
    Disc(ExhaustionDisc),
}

#[derive(Debug, Clone, PartialEq)]
enum Layout {
    /// Sorted nodes covering `[a_K, b_K]`.
    Interval { nodes: Vec<f64> },
    /// Node `(i, j)` sits at `radii[i] e^{2πij/angles}`, stored at
    /// `i · angles + j`; `radii[0] = 0`.
    Disc { radii: Vec<f64>, angles: usize },
}

/// Sample grid covering the outermost exhaustion level.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain,
    layout: Layout,
    points: Vec<Complex64>,
    /// Smallest level containing each node.
    node_level: Vec<usize>,
}

/// Equispaced samples of `[lo, hi]` with `extra` moved onto the grid: each
/// inserted point replaces its nearest sample, or is added beside it when
/// that sample is already taken.
fn merged_nodes(lo: f64, hi: f64, n: usize, extra: &[f64]) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n).map(|k| lo + h * k as f64).collect();
    nodes[n - 1] = hi;
    let mut pinned = vec![false; n];
    pinned[0] = true;
    pinned[n - 1] = true;
    let mut added = Vec::new();
    for &e in extra.iter().filter(|e| **e > lo && **e < hi) {
        let k = (((e - lo) / h).round() as usize).min(n - 1);
        if nodes[k] == e {
            pinned[k] = true;
        } else if !pinned[k] {
            nodes[k] = e;
            pinned[k] = true;
        } else {
            added.push(e);
        }
    }
    nodes.extend(added);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

impl Grid {
    /// `n` equispaced nodes on the outer level plus every `aₙ`, `bₙ` and
    /// `extra` breakpoint.
    pub fn interval(exh: &Exhaustion1D, n: usize, extra: &[f64]) -> Result<Arc<Self>, ContError> {
        if n < 2 {
            return Err(ContError::InvalidParameter("need at least two nodes".into()));
        }
        let (lo, hi) = exh.outer();
        let mut inserted = exh.bounds();
        inserted.extend_from_slice(extra);
        let nodes = merged_nodes(lo, hi, n, &inserted);
        let points = nodes.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        let node_level = nodes
            .iter()
            .map(|&x| {
                exh.intervals()
                    .iter()
                    .position(|&(a, b)| x >= a - MEMBERSHIP_TOL && x <= b + MEMBERSHIP_TOL)
                    .expect("nodes lie in the outer level")
            })
            .collect();
        Ok(Arc::new(Self {
            domain: Domain::Interval(exh.clone()),
            layout: Layout::Interval { nodes },
            points,
            node_level,
        }))
    }

    pub fn interval_default(exh: &Exhaustion1D) -> Arc<Self> {
        Self::interval(exh, INTERVAL_NODES, &[]).expect("valid defaults")
    }

    /// Polar grid: `n_radii` equispaced radii on `[0, r_K]` plus every `rₙ`,
    /// times `n_angles` equispaced angles.
    pub fn disc(exh: &ExhaustionDisc, n_radii: usize, n_angles: usize) -> Result<Arc<Self>, ContError> {
        if n_radii < 2 || n_angles < 3 {
            return Err(ContError::InvalidParameter("need ≥ 2 radii and ≥ 3 angles".into()));
        }
        let radii = merged_nodes(0.0, exh.outer(), n_radii, exh.radii());
        let mut points = Vec::with_capacity(radii.len() * n_angles);
        let mut node_level = Vec::with_capacity(radii.len() * n_angles);
        for &r in &radii {
            let level = exh
                .radii()
                .iter()
                .position(|&rn| r <= rn + MEMBERSHIP_TOL)
                .expect("radii lie in the outer level");
            for j in 0..n_angles {
                points.push(Complex64::from_polar(r, TAU * j as f64 / n_angles as f64));
                node_level.push(level);
            }
        }
        Ok(Arc::new(Self {
            domain: Domain::Disc(exh.clone()),
            layout: Layout::Disc {
                radii,
                angles: n_angles,
            },
            points,
            node_level,
        }))
    }

    pub fn disc_default(exh: &ExhaustionDisc) -> Arc<Self> {
        Self::disc(exh, DISC_RADII, DISC_ANGLES).expect("valid defaults")
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_disc(&self) -> bool {
        matches!(self.layout, Layout::Disc { .. })
    }

    pub fn levels(&self) -> usize {
        match &self.domain {
            Domain::Interval(e) => e.levels(),
            Domain::Disc(e) => e.levels(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Smallest level containing node `k`.
    pub fn node_level(&self, k: usize) -> usize {
        self.node_level[k]
    }

    pub fn in_level(&self, k: usize, level: usize) -> bool {
        self.node_level[k] <= level
    }

    /// Whether `z` lies in `K_level`, up to the membership slack.
    pub fn point_in_level(&self, z: Complex64, level: usize) -> bool {
        match &self.domain {
            Domain::Interval(e) => {
                let (a, b) = e.intervals()[level];
                z.re >= a - MEMBERSHIP_TOL && z.re <= b + MEMBERSHIP_TOL
            }
            Domain::Disc(e) => z.norm() <= e.radii()[level] + MEMBERSHIP_TOL,
        }
    }

    /// Largest distance between grid neighbours.
    pub fn cell_size(&self) -> f64 {
        match &self.layout {
            Layout::Interval { nodes } => nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
            Layout::Disc { radii, angles } => {
                let dr = radii.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
                let outer = *radii.last().expect("nonempty");
                dr.max(outer * 2.0 * (std::f64::consts::PI / *angles as f64).sin())
            }
        }
    }

    /// Neighbouring node pairs `(k, l)`, each listed once.
    pub fn neighbour_pairs(&self) -> Vec<(usize, usize)> {
        match &self.layout {
            Layout::Interval { nodes } => (0..nodes.len() - 1).map(|k| (k, k + 1)).collect(),
            Layout::Disc { radii, angles } => {
                let m = *angles;
                let mut out = Vec::new();
                for i in 0..radii.len() {
                    for j in 0..m {
                        let k = i * m + j;
                        if i > 0 {
                            out.push((k, i * m + (j + 1) % m));
                        }
                        if i + 1 < radii.len() {
                            out.push((k, (i + 1) * m + j));
                        }
                    }
                }
                out
            }
        }
    }

    /// Grid adjacency; the centre nodes of the disc grid are one point.
    pub fn adjacent(&self, k: usize, l: usize) -> bool {
        match &self.layout {
            Layout::Interval { .. } => k.abs_diff(l) <= 1,
            Layout::Disc { angles, .. } => {
                let m = *angles;
                let (ik, jk) = (k / m, k % m);
                let (il, jl) = (l / m, l % m);
                if ik == 0 || il == 0 {
                    return ik.max(il) <= 1;
                }
                let dj = jk.abs_diff(jl);
                ik.abs_diff(il) <= 1 && dj.min(m - dj) <= 1
            }
        }
    }

    /// Fractional grid coordinates of `z`: `(index, 0)` on the interval,
    /// `(radial index, angle / Δθ)` on the disc.
    pub fn index_coords(&self, z: Complex64) -> Result<(f64, f64), ContError> {
        match &self.layout {
            Layout::Interval { nodes } => {
                let (i, t) = locate(nodes, z.re).ok_or(ContError::OutsideDomain(z))?;
                Ok((i as f64 + t, 0.0))
            }
            Layout::Disc { radii, angles } => {
                let (i, t) = locate(radii, z.norm()).ok_or(ContError::OutsideDomain(z))?;
                let theta = z.im.atan2(z.re).rem_euclid(TAU);
                Ok((i as f64 + t, theta / TAU * *angles as f64))
            }
        }
    }

    /// Number of angles of a disc grid.
    pub fn angles(&self) -> Option<usize> {
        match &self.layout {
            Layout::Disc { angles, .. } => Some(*angles),
            Layout::Interval { .. } => None,
        }
    }

    pub fn rows(&self) -> usize {
        match &self.layout {
            Layout::Interval { nodes } => nodes.len(),
            Layout::Disc { radii, .. } => radii.len(),
        }
    }

    /// Interpolates node values at `z`: linear on the interval, bilinear in
    /// `(r, θ)` on the disc.
    pub fn interpolate(&self, values: &[Complex64], z: Complex64) -> Result<Complex64, ContError> {
        match &self.layout {
            Layout::Interval { nodes } => {
                let (i, t) = locate(nodes, z.re).ok_or(ContError::OutsideDomain(z))?;
                if t == 0.0 {
                    return Ok(values[i]);
                }
                Ok(values[i] * (1.0 - t) + values[i + 1] * t)
            }
            Layout::Disc { radii, angles } => {
                let m = *angles;
                let (i, t) = locate(radii, z.norm()).ok_or(ContError::OutsideDomain(z))?;
                let theta = z.im.atan2(z.re).rem_euclid(TAU) / TAU * m as f64;
                let j0 = (theta.floor() as usize) % m;
                let s = theta - theta.floor();
                let j1 = (j0 + 1) % m;
                let ring = |i: usize| values[i * m + j0] * (1.0 - s) + values[i * m + j1] * s;
                if t == 0.0 {
                    return Ok(ring(i));
                }
                Ok(ring(i) * (1.0 - t) + ring(i + 1) * t)
            }
        }
    }
}

/// `(i, t)` with `x = nodes[i] + t (nodes[i+1] − nodes[i])`, `t ∈ [0, 1)`,
/// or `t = 0` at the last node.
fn locate(nodes: &[f64], x: f64) -> Option<(usize, f64)> {
    let first = nodes[0];
    let last = *nodes.last()?;
    if !(x >= first - MEMBERSHIP_TOL && x <= last + MEMBERSHIP_TOL) {
        return None;
    }
    let x = x.clamp(first, last);
    let n = nodes.len();
    let i = nodes.partition_point(|v| *v <= x).saturating_sub(1);
    if i + 1 >= n {
        return Some((n - 1, 0.0));
    }
    Some((i, (x - nodes[i]) / (nodes[i + 1] - nodes[i])))
}

/// Complex samples of a continuous function at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self, ContError> {
        if values.len() != grid.len() {
            return Err(ContError::GridMismatch);
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(ContError::InvalidParameter("non-finite value".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(Complex64) -> Complex64) -> Self {
        let values = grid.points().iter().map(|z| f(*z)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn constant(grid: &Arc<Grid>, c: Complex64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    /// `𝟙`.
    pub fn one(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, Complex64::new(1.0, 0.0))
    }

    /// `e₁(z) = z` (on the interval, `x`).
    pub fn coordinate(grid: &Arc<Grid>) -> Self {
        Self::from_fn(grid, |z| z)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    pub fn interpolate(&self, z: Complex64) -> Result<Complex64, ContError> {
        self.grid.interpolate(&self.values, z)
    }

    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self, ContError> {
        if !self.same_grid(other) {
            return Err(ContError::GridMismatch);
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    /// Largest `|f(z) − f(w)| / |z − w|` over neighbouring nodes.
    pub fn lipschitz_estimate(&self) -> f64 {
        self.grid
            .neighbour_pairs()
            .into_iter()
            .filter_map(|(k, l)| {
                let d = (self.grid.points[k] - self.grid.points[l]).norm();
                (d > 0.0).then(|| (self.values[k] - self.values[l]).norm() / d)
            })
            .fold(0.0, f64::max)
    }
}

/// `‖f‖_{∞,n}`: the largest `|f|` over nodes in `Kₙ`.
pub fn sup_seminorm_grid(f: &GridFunction, level: usize) -> Result<f64, ContError> {
    if level >= f.grid.levels() {
        return Err(ContError::UnresolvedLevel(level));
    }
    Ok(f.values
        .iter()
        .enumerate()
        .filter(|(k, _)| f.grid.in_level(*k, level))
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exhaustion_validation() {
        assert!(Exhaustion1D::new(vec![(0.2, 0.8), (0.1, 0.9)]).is_ok());
        assert!(Exhaustion1D::new(vec![(0.2, 0.8), (0.2, 0.9)]).is_err());
        assert!(Exhaustion1D::new(vec![(0.8, 0.2)]).is_err());
        assert!(Exhaustion1D::new(vec![(0.0, 0.5)]).is_err());
        assert!(ExhaustionDisc::new(vec![0.0, 0.5]).is_ok());
        assert!(ExhaustionDisc::new(vec![0.5, 0.5]).is_err());
        assert!(ExhaustionDisc::new(vec![1.0]).is_err());
    }

    #[test]
    fn interval_grid_contains_bounds() {
        let g = Grid::interval_default(&Exhaustion1D::standard());
        for b in Exhaustion1D::standard().bounds() {
            assert!(g.points().iter().any(|p| p.re == b));
        }
        assert_eq!(g.len(), INTERVAL_NODES);
        let k45 = g.points().iter().position(|p| p.re == 0.8).unwrap();
        assert_eq!(g.node_level(k45), 0);
    }

    #[test]
    fn sup_examples() {
        let g = Grid::interval_default(&Exhaustion1D::standard());
        let f = GridFunction::constant(&g, c(3.0, 4.0));
        for n in 0..4 {
            assert_eq!(sup_seminorm_grid(&f, n).unwrap(), 5.0);
        }
        let x = GridFunction::coordinate(&g);
        assert_eq!(sup_seminorm_grid(&x, 0).unwrap(), 0.8);
        assert!(matches!(sup_seminorm_grid(&x, 4), Err(ContError::UnresolvedLevel(4))));

        let d = Grid::disc(&ExhaustionDisc::standard(), 64, 64).unwrap();
        let z = GridFunction::coordinate(&d);
        assert!((sup_seminorm_grid(&z, 0).unwrap() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn interpolation() {
        let g = Grid::interval_default(&Exhaustion1D::standard());
        let x = GridFunction::coordinate(&g);
        for t in [0.025, 0.3333, 0.5, 0.975] {
            assert!((x.interpolate(c(t, 0.0)).unwrap() - c(t, 0.0)).norm() < 1e-15);
        }
        assert!(x.interpolate(c(0.01, 0.0)).is_err());

        let d = Grid::disc(&ExhaustionDisc::standard(), 64, 128).unwrap();
        let radial = GridFunction::from_fn(&d, |z| c(z.norm(), 0.0));
        let p = Complex64::from_polar(0.4, 1.0);
        assert!((radial.interpolate(p).unwrap().re - 0.4).abs() < 1e-14);
        assert!(radial.interpolate(c(0.9, 0.0)).is_err());
    }

    #[test]
    fn adjacency_and_index_coords() {
        let d = Grid::disc(&ExhaustionDisc::standard(), 16, 8).unwrap();
        let m = 8;
        assert!(d.adjacent(0, 5));
        assert!(d.adjacent(0, m + 3));
        assert!(!d.adjacent(m, m + 3));
        assert!(d.adjacent(m, m + 7));
        let (ri, tj) = d.index_coords(d.points()[2 * m + 3]).unwrap();
        assert!((ri - 2.0).abs() < 1e-12 && (tj - 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn sup_nondecreasing_in_level(a in -3.0f64..3.0, b in -3.0f64..3.0, w in 1.0f64..20.0) {
            let g = Grid::interval(&Exhaustion1D::standard(), 512, &[]).unwrap();
            let f = GridFunction::from_fn(&g, |z| Complex64::from_polar(1.0 + a * z.re, b + w * z.re) * (z.re * w).sin());
            let sups: Vec<f64> = (0..4).map(|n| sup_seminorm_grid(&f, n).unwrap()).collect();
            prop_assert!(sups.windows(2).all(|s| s[0] <= s[1]));
            let d = Grid::disc(&ExhaustionDisc::new(vec![0.1, 0.5, 0.9]).unwrap(), 32, 32).unwrap();
            let f = GridFunction::from_fn(&d, |z| (z * w).sin() + a * z.norm());
            let sups: Vec<f64> = (0..3).map(|n| sup_seminorm_grid(&f, n).unwrap()).collect();
            prop_assert!(sups.windows(2).all(|s| s[0] <= s[1]));
        }
    }
}
