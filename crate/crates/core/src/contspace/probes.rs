//! Seeded random probes, weights and homeomorphisms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::maps::{
    build_annulus_homeo, build_interval_homeo, AnnulusDeformation, AnnulusHomeo, Orientation,
    PiecewiseLinearHomeo,
};
use super::{Domain, Exhaustion1D, ExhaustionDisc, Grid, GridFunction};

fn unit(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(rng.random_range(0.2..1.0), rng.random_range(0.0..2.0 * PI))
}

/// Smooth probes: a low-degree trigonometric (interval) or `z, z̄` (disc)
/// polynomial plus a Gaussian bump at a random centre.
pub fn probe_functions(grid: &Arc<Grid>, count: usize, rng: &mut impl Rng) -> Vec<GridFunction> {
    (0..count)
        .map(|_| match grid.domain() {
            Domain::Interval(e) => {
                let (lo, hi) = e.outer();
                let coeffs: Vec<Complex64> = (0..4).map(|_| unit(rng)).collect();
                let centre = rng.random_range(lo..hi);
                let width = rng.random_range(0.05..0.3);
                let height = unit(rng) * 2.0;
                GridFunction::from_fn(grid, move |z| {
                    let x = z.re;
                    let wave: Complex64 = coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * Complex64::from_polar(1.0, PI * (k + 1) as f64 * x))
                        .sum();
                    wave + height * (-((x - centre) / width).powi(2)).exp()
                })
            }
            Domain::Disc(e) => {
                let r = e.outer();
                let coeffs: Vec<(i32, i32, Complex64)> = (0..=2)
                    .flat_map(|p| (0..=2 - p).map(move |q| (p, q)))
                    .map(|(p, q)| (p, q, unit(rng)))
                    .collect();
                let centre = Complex64::from_polar(rng.random_range(0.0..r), rng.random_range(0.0..2.0 * PI));
                let width = rng.random_range(0.1..0.4);
                let height = unit(rng) * 2.0;
                GridFunction::from_fn(grid, move |z| {
                    let poly: Complex64 = coeffs.iter().map(|(p, q, c)| c * z.powi(*p) * z.conj().powi(*q)).sum();
                    poly + height * (-((z - centre).norm_sqr()) / (width * width)).exp()
                })
            }
        })
        .collect()
}

/// `h = exp(i(α + β Re z + γ Im z + δ sin(k Re z)))`.
pub fn random_unimodular(grid: &Arc<Grid>, rng: &mut impl Rng) -> GridFunction {
    let alpha = rng.random_range(-PI..PI);
    let beta = rng.random_range(-3.0..3.0);
    let gamma = if grid.is_disc() { rng.random_range(-3.0..3.0) } else { 0.0 };
    let delta = rng.random_range(-1.0..1.0);
    let k = rng.random_range(1.0..6.0);
    GridFunction::from_fn(grid, move |z| {
        Complex64::from_polar(1.0, alpha + beta * z.re + gamma * z.im + delta * (k * z.re).sin())
    })
}

/// Random orientation with one control per band between consecutive
/// exhaustion bounds, kept in the middle of the band and of its image.
pub fn random_interval_homeo(exh: &Exhaustion1D, rng: &mut impl Rng) -> PiecewiseLinearHomeo {
    let orientation = if rng.random_bool(0.5) {
        Orientation::Decreasing
    } else {
        Orientation::Increasing
    };
    let forced = build_interval_homeo(exh, orientation, &[]).expect("forced knots are monotone");
    let bounds = exh.bounds();
    let controls: Vec<(f64, f64)> = bounds
        .windows(2)
        .map(|w| {
            let (p, q) = (w[0], w[1]);
            let (fp, fq) = (forced.eval(p), forced.eval(q));
            let s = rng.random_range(0.35..0.65);
            let t = rng.random_range(0.35..0.65);
            (p + (q - p) * s, fp + (fq - fp) * t)
        })
        .collect();
    build_interval_homeo(exh, orientation, &controls).expect("controls stay inside their bands")
}

/// Random twist (peak in `[−π, π]`) and mild radial deformation on every
/// annulus.
pub fn random_annulus_homeo(exh: &ExhaustionDisc, rng: &mut impl Rng) -> AnnulusHomeo {
    let radii = exh.radii();
    let deformations: Vec<AnnulusDeformation> = (0..radii.len().saturating_sub(1))
        .map(|n| {
            let (lo, hi) = (radii[n], radii[n + 1]);
            let s = rng.random_range(0.35..0.65);
            let mid = lo + (hi - lo) * s;
            let rho = lo + (hi - lo) * (s + rng.random_range(-0.1..0.1));
            AnnulusDeformation {
                annulus: n,
                twist: vec![(lo, 0.0), (mid, rng.random_range(-PI..PI)), (hi, 0.0)],
                radial: vec![(mid, rho)],
            }
        })
        .collect();
    build_annulus_homeo(exh, &deformations).expect("random deformations are continuous")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contspace::PointMap;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_probes_repeat() {
        let g = Grid::interval(&Exhaustion1D::standard(), 256, &[]).unwrap();
        let a = probe_functions(&g, 3, &mut ChaCha8Rng::seed_from_u64(1));
        let b = probe_functions(&g, 3, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }

    #[test]
    fn random_homeos_respect_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let exh = Exhaustion1D::standard();
        for _ in 0..20 {
            let phi = random_interval_homeo(&exh, &mut rng);
            for &(a, b) in exh.intervals() {
                let (pa, pb) = (phi.eval(a), phi.eval(b));
                assert_eq!((pa.min(pb), pa.max(pb)), (a, b));
            }
        }
        let disc = ExhaustionDisc::new(vec![0.25, 0.5, 0.8]).unwrap();
        for _ in 0..20 {
            let phi = random_annulus_homeo(&disc, &mut rng);
            for &r in disc.radii() {
                let z = Complex64::from_polar(r, rng.random_range(0.0..6.0));
                assert!((phi.map(z).norm() - r).abs() < 1e-12);
            }
        }
        let h = random_unimodular(&Grid::disc(&disc, 16, 16).unwrap(), &mut rng);
        assert!(h.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
    }
}
