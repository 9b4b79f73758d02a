//! Point maps: piecewise-linear self-maps of `(0, 1)` and twisted annulus
//! homeomorphisms of the disc.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::{ContError, Exhaustion1D, ExhaustionDisc};

/// Snap distance for knots that must coincide with exhaustion bounds.
const KNOT_TOL: f64 = 1e-15;
/// Twist mismatch tolerated across a circle, modulo `2π`.
const TWIST_TOL: f64 = 1e-12;

pub trait PointMap {
    fn map(&self, z: Complex64) -> Complex64;
}

impl<F: Fn(Complex64) -> Complex64> PointMap for F {
    fn map(&self, z: Complex64) -> Complex64 {
        self(z)
    }
}

/// Linear interpolation through `knots`, constant beyond the ends.
fn pl_eval(knots: &[(f64, f64)], x: f64) -> f64 {
    let n = knots.len();
    if x <= knots[0].0 {
        return knots[0].1;
    }
    if x >= knots[n - 1].0 {
        return knots[n - 1].1;
    }
    let i = knots.partition_point(|k| k.0 <= x) - 1;
    let (x0, y0) = knots[i];
    let (x1, y1) = knots[i + 1];
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn check_knots(knots: &[(f64, f64)]) -> Result<(), ContError> {
    if knots.len() < 2 {
        return Err(ContError::InvalidMap("need at least two knots".into()));
    }
    if knots.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(ContError::InvalidMap("non-finite knot".into()));
    }
    if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(ContError::InvalidMap("knot abscissae must increase".into()));
    }
    Ok(())
}

/// Continuous piecewise-linear map `[0, 1] → [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearMap {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinearMap {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, ContError> {
        check_knots(&knots)?;
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return Err(ContError::InvalidMap("knots must span [0, 1]".into()));
        }
        if knots.iter().any(|(_, y)| !(0.0..=1.0).contains(y)) {
            return Err(ContError::InvalidMap("values must lie in [0, 1]".into()));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        pl_eval(&self.knots, x)
    }
}

impl PointMap for PiecewiseLinearMap {
    fn map(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.eval(z.re), 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

impl Orientation {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "increasing" | "inc" | "+" => Some(Self::Increasing),
            "decreasing" | "dec" | "-" => Some(Self::Decreasing),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Increasing => "increasing",
            Self::Decreasing => "decreasing",
        }
    }
}

/// Piecewise-linear homeomorphism of `(0, 1)` with `φ(Kₙ) = Kₙ` for every
/// level of the exhaustion it was built on.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearHomeo {
    map: PiecewiseLinearMap,
    orientation: Orientation,
}

impl PiecewiseLinearHomeo {
    pub fn knots(&self) -> &[(f64, f64)] {
        self.map.knots()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.map.eval(x)
    }

    pub fn as_map(&self) -> &PiecewiseLinearMap {
        &self.map
    }
}

impl PointMap for PiecewiseLinearHomeo {
    fn map(&self, z: Complex64) -> Complex64 {
        self.map.map(z)
    }
}

/// Interpolates `controls` together with the forced breakpoints: `aₙ ↦ aₙ`,
/// `bₙ ↦ bₙ` when increasing, `aₙ ↦ bₙ`, `bₙ ↦ aₙ` when decreasing.
pub fn build_interval_homeo(
    exh: &Exhaustion1D,
    orientation: Orientation,
    controls: &[(f64, f64)],
) -> Result<PiecewiseLinearHomeo, ContError> {
    let flip = orientation == Orientation::Decreasing;
    let mut knots: Vec<(f64, f64)> = vec![(0.0, flip as u8 as f64), (1.0, !flip as u8 as f64)];
    for &(a, b) in exh.intervals() {
        knots.push((a, if flip { b } else { a }));
        knots.push((b, if flip { a } else { b }));
    }
    for &(x, y) in controls {
        if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
            return Err(ContError::InvalidMap(format!("control ({x}, {y}) outside (0, 1)²")));
        }
        knots.push((x, y));
    }
    knots.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(knots.len());
    for k in knots {
        match merged.last() {
            Some(last) if last.0 == k.0 => {
                if last.1 != k.1 {
                    return Err(ContError::InvalidMap(format!(
                        "conflicting values at x = {}",
                        k.0
                    )));
                }
            }
            _ => merged.push(k),
        }
    }
    for (i, w) in merged.windows(2).enumerate() {
        let rising = w[1].1 > w[0].1;
        let falling = w[1].1 < w[0].1;
        if (flip && !falling) || (!flip && !rising) {
            return Err(ContError::MonotonicityViolation(i + 1));
        }
    }
    Ok(PiecewiseLinearHomeo {
        map: PiecewiseLinearMap::new(merged)?,
        orientation,
    })
}

/// Continuous non-injective map sending every `Kₙ` onto itself: each band
/// between consecutive exhaustion bounds is folded twice (up, down, up) onto
/// itself; identity outside the outer level.
pub fn zigzag_fold(exh: &Exhaustion1D) -> PiecewiseLinearMap {
    let bounds = exh.bounds();
    let mut knots = vec![(0.0, 0.0)];
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let third = (hi - lo) / 3.0;
        knots.push((lo, lo));
        knots.push((lo + third, hi));
        knots.push((lo + 2.0 * third, lo));
    }
    knots.push((*bounds.last().expect("nonempty"), *bounds.last().expect("nonempty")));
    knots.push((1.0, 1.0));
    PiecewiseLinearMap::new(knots).expect("fold knots are valid")
}

/// Deformation of the annulus `r_annulus ≤ |z| ≤ r_{annulus+1}`:
/// `r e^{iθ} ↦ ρ(r) e^{i(θ + τ(r))}` with `τ` and `ρ` piecewise linear.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusDeformation {
    pub annulus: usize,
    /// `(r, τ)`, spanning the annulus.
    pub twist: Vec<(f64, f64)>,
    /// Interior radial knots `(r, ρ)`; the bounding circles stay fixed.
    pub radial: Vec<(f64, f64)>,
}

impl AnnulusDeformation {
    /// Twist rising linearly from 0 to `peak` at the mid-radius and back.
    pub fn triangle_twist(exh: &ExhaustionDisc, annulus: usize, peak: f64) -> Self {
        let (lo, hi) = (exh.radii()[annulus], exh.radii()[annulus + 1]);
        Self {
            annulus,
            twist: vec![(lo, 0.0), (0.5 * (lo + hi), peak), (hi, 0.0)],
            radial: Vec::new(),
        }
    }

    /// The half-turn twist of the standard two-level disc exhaustion.
    pub fn half_turn(exh: &ExhaustionDisc) -> Self {
        Self::triangle_twist(exh, 0, PI)
    }
}

#[derive(Debug, Clone)]
struct Band {
    lo: f64,
    hi: f64,
    twist: Vec<(f64, f64)>,
    radial: Vec<(f64, f64)>,
}

/// Homeomorphism of the disc preserving every exhaustion circle.
#[derive(Debug, Clone)]
pub struct AnnulusHomeo {
    bands: Vec<Band>,
}

impl AnnulusHomeo {
    pub fn identity() -> Self {
        Self { bands: Vec::new() }
    }

    /// `τ(r)`, zero outside the deformed annuli.
    pub fn twist_at(&self, r: f64) -> f64 {
        self.band(r).map(|b| pl_eval(&b.twist, r)).unwrap_or(0.0)
    }

    fn band(&self, r: f64) -> Option<&Band> {
        self.bands.iter().find(|b| r >= b.lo && r <= b.hi)
    }
}

impl PointMap for AnnulusHomeo {
    fn map(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        match self.band(r) {
            None => z,
            Some(b) => {
                let rho = pl_eval(&b.radial, r);
                Complex64::from_polar(rho, z.im.atan2(z.re) + pl_eval(&b.twist, r))
            }
        }
    }
}

fn snap(x: f64, target: f64) -> Option<f64> {
    ((x - target).abs() <= KNOT_TOL).then_some(target)
}

fn wrapped(delta: f64) -> f64 {
    (delta + PI).rem_euclid(TAU) - PI
}

/// Validates twist continuity mod `2π` across every circle (the inner disc
/// and the outside are untwisted) and that each circle is preserved.
pub fn build_annulus_homeo(
    exh: &ExhaustionDisc,
    deformations: &[AnnulusDeformation],
) -> Result<AnnulusHomeo, ContError> {
    let radii = exh.radii();
    let mut bands: Vec<Option<Band>> = vec![None; radii.len().saturating_sub(1)];
    for d in deformations {
        if d.annulus + 1 >= radii.len() {
            return Err(ContError::InvalidMap(format!("no annulus {}", d.annulus)));
        }
        if bands[d.annulus].is_some() {
            return Err(ContError::InvalidMap(format!("annulus {} deformed twice", d.annulus)));
        }
        let (lo, hi) = (radii[d.annulus], radii[d.annulus + 1]);
        let mut twist = d.twist.clone();
        check_knots(&twist)?;
        let n = twist.len();
        match (snap(twist[0].0, lo), snap(twist[n - 1].0, hi)) {
            (Some(a), Some(b)) => {
                twist[0].0 = a;
                twist[n - 1].0 = b;
            }
            _ => {
                return Err(ContError::InvalidMap(format!(
                    "twist profile must span [{lo}, {hi}]"
                )))
            }
        }
        let mut radial = vec![(lo, lo)];
        radial.extend(d.radial.iter().copied());
        radial.push((hi, hi));
        check_knots(&radial)?;
        if radial.windows(2).any(|w| w[1].1 <= w[0].1) {
            return Err(ContError::InvalidMap("radial profile must increase".into()));
        }
        bands[d.annulus] = Some(Band {
            lo,
            hi,
            twist,
            radial,
        });
    }
    for (n, &r) in radii.iter().enumerate() {
        if r == 0.0 {
            continue;
        }
        let inside = n
            .checked_sub(1)
            .and_then(|k| bands[k].as_ref())
            .map(|b| b.twist[b.twist.len() - 1].1)
            .unwrap_or(0.0);
        let outside = bands
            .get(n)
            .and_then(|b| b.as_ref())
            .map(|b| b.twist[0].1)
            .unwrap_or(0.0);
        if wrapped(outside - inside).abs() > TWIST_TOL {
            return Err(ContError::Discontinuous(r));
        }
    }
    let homeo = AnnulusHomeo {
        bands: bands.into_iter().flatten().collect(),
    };
    for &r in radii {
        let deviation = (0..64)
            .map(|j| {
                let z = Complex64::from_polar(r, TAU * j as f64 / 64.0);
                (homeo.map(z).norm() - r).abs()
            })
            .fold(0.0, f64::max);
        if deviation > 1e-12 {
            return Err(ContError::CircleViolation {
                radius: r,
                deviation,
            });
        }
    }
    Ok(homeo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decreasing_swaps_bounds() {
        let exh = Exhaustion1D::new(vec![(0.2, 0.8)]).unwrap();
        let phi = build_interval_homeo(&exh, Orientation::Decreasing, &[]).unwrap();
        assert_eq!(phi.eval(0.2), 0.8);
        assert_eq!(phi.eval(0.8), 0.2);
        assert!((phi.eval(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kinked_increasing_map_validates() {
        let exh = Exhaustion1D::new(vec![(0.2, 0.8)]).unwrap();
        let phi = build_interval_homeo(&exh, Orientation::Increasing, &[(0.5, 0.5), (0.3, 0.45), (0.7, 0.55)]).unwrap();
        for x in [0.2, 0.5, 0.8] {
            assert_eq!(phi.eval(x), x);
        }
        assert_eq!(phi.eval(0.3), 0.45);
    }

    #[test]
    fn non_monotone_controls_rejected() {
        let exh = Exhaustion1D::standard();
        let err = build_interval_homeo(&exh, Orientation::Increasing, &[(0.3, 0.85)]).unwrap_err();
        assert!(matches!(err, ContError::MonotonicityViolation(_)));
        let err = build_interval_homeo(&exh, Orientation::Increasing, &[(0.2, 0.3)]).unwrap_err();
        assert!(matches!(err, ContError::InvalidMap(_)));
    }

    #[test]
    fn zigzag_maps_levels_onto_themselves() {
        let exh = Exhaustion1D::standard();
        let z = zigzag_fold(&exh);
        for &(a, b) in exh.intervals() {
            assert_eq!(z.eval(a), a);
            assert_eq!(z.eval(b), b);
            let samples: Vec<f64> = (0..=3000).map(|k| z.eval(a + (b - a) * k as f64 / 3000.0)).collect();
            let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!((lo - a).abs() < 1e-12 && (hi - b).abs() < 1e-12);
        }
        let w = (0.8 - 0.2) / 3.0;
        assert!((z.eval(0.2 + w / 2.0) - z.eval(0.2 + 1.5 * w)).abs() < 1e-12);
    }

    #[test]
    fn zero_twist_is_identity() {
        let exh = ExhaustionDisc::standard();
        let d = AnnulusDeformation {
            annulus: 0,
            twist: vec![(0.25, 0.0), (0.8, 0.0)],
            radial: vec![],
        };
        let h = build_annulus_homeo(&exh, &[d]).unwrap();
        for z in [Complex64::new(0.3, 0.1), Complex64::new(-0.5, 0.5), Complex64::new(0.1, 0.0)] {
            assert!((h.map(z) - z).norm() < 1e-15);
        }
    }

    #[test]
    fn half_turn_example() {
        let exh = ExhaustionDisc::standard();
        let h = build_annulus_homeo(&exh, &[AnnulusDeformation::half_turn(&exh)]).unwrap();
        assert!((h.twist_at(21.0 / 40.0) - PI).abs() < 1e-15);
        let z = Complex64::new(21.0 / 40.0, 0.0);
        assert!((h.map(z) + z).norm() < 1e-15);
        for r in [0.25, 0.8] {
            let z = Complex64::from_polar(r, 0.7);
            assert!((h.map(z) - z).norm() < 1e-15);
        }
    }

    #[test]
    fn discontinuous_twist_rejected() {
        let exh = ExhaustionDisc::standard();
        let d = AnnulusDeformation {
            annulus: 0,
            twist: vec![(0.25, 0.5), (0.8, 0.0)],
            radial: vec![],
        };
        assert_eq!(build_annulus_homeo(&exh, &[d]).unwrap_err(), ContError::Discontinuous(0.25));
        let full_turn = AnnulusDeformation {
            annulus: 0,
            twist: vec![(0.25, 0.0), (0.8, TAU)],
            radial: vec![],
        };
        assert!(build_annulus_homeo(&exh, &[full_turn]).is_ok());
    }

    proptest! {
        #[test]
        fn annulus_homeo_preserves_circles(peak in -7.0f64..7.0, mid in 0.3f64..0.75, rho in 0.1f64..0.9, theta in 0.0f64..6.3) {
            let exh = ExhaustionDisc::new(vec![0.25, 0.8]).unwrap();
            let d = AnnulusDeformation {
                annulus: 0,
                twist: vec![(0.25, 0.0), (mid, peak), (0.8, 0.0)],
                radial: vec![(mid, 0.25 + rho * 0.55)],
            };
            let h = build_annulus_homeo(&exh, &[d]).unwrap();
            for r in [0.25, 0.8] {
                let z = Complex64::from_polar(r, theta);
                prop_assert!((h.map(z).norm() - r).abs() < 1e-12);
            }
            let z = Complex64::from_polar(0.5, theta);
            let w = h.map(z);
            prop_assert!(w.norm() > 0.25 && w.norm() < 0.8);
        }

        #[test]
        fn interval_homeo_preserves_levels(ys in proptest::collection::vec(0.05f64..0.95, 4), dec in any::<bool>()) {
            let exh = Exhaustion1D::standard();
            let o = if dec { Orientation::Decreasing } else { Orientation::Increasing };
            let bands = [(0.2, 0.4), (0.4, 0.6), (0.6, 0.8)];
            let mut controls = Vec::new();
            for (k, (lo, hi)) in bands.iter().enumerate() {
                let x = lo + (hi - lo) * 0.5;
                let t = 0.2 + 0.6 * ys[k];
                let y = if dec { 1.0 - (lo + (hi - lo) * t) } else { lo + (hi - lo) * t };
                controls.push((x, y));
            }
            let phi = build_interval_homeo(&exh, o, &controls).unwrap();
            for &(a, b) in exh.intervals() {
                let (pa, pb) = (phi.eval(a), phi.eval(b));
                prop_assert_eq!(pa.min(pb), a);
                prop_assert_eq!(pa.max(pb), b);
            }
        }
    }
}
