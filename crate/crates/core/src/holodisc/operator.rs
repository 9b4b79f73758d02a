//! Operators on the truncated model, the seminorm isometry test, and the
//! recovery of `(α, β)` from an isometry presented only through its action.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{samples_for_degree, DiscExhaustion, Family, HoloError, TaylorFunction, DEFAULT_DEGREE};

/// Unimodularity slack for operator parameters.
const PARAM_TOL: f64 = 1e-12;
/// Tolerance on `‖φ‖ ≤ 1` over unit-circle samples.
const SELF_MAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum DiscOperator {
    /// `f ↦ α f(β ·)`.
    Rotation { alpha: Complex64, beta: Complex64 },
    /// `f ↦ m · (f ∘ φ)`.
    WeightedComposition {
        multiplier: TaylorFunction,
        symbol: TaylorFunction,
    },
    /// Matrix acting on coefficient vectors.
    Matrix(DMatrix<Complex64>),
}

impl DiscOperator {
    pub fn rotation(alpha: Complex64, beta: Complex64) -> Result<Self, HoloError> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !((v.norm() - 1.0).abs() <= PARAM_TOL) {
                return Err(HoloError::InvalidOperator(format!("{name} = {v} is not unimodular")));
            }
        }
        Ok(Self::Rotation { alpha, beta })
    }

    pub fn weighted_composition(
        multiplier: TaylorFunction,
        symbol: TaylorFunction,
    ) -> Result<Self, HoloError> {
        let q = samples_for_degree(symbol.degree_bound());
        let peak = symbol
            .circle_values(1.0, q)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if peak > 1.0 + SELF_MAP_TOL {
            return Err(HoloError::InvalidOperator(format!(
                "symbol reaches modulus {peak} on the unit circle"
            )));
        }
        Ok(Self::WeightedComposition { multiplier, symbol })
    }

    pub fn matrix(m: DMatrix<Complex64>) -> Result<Self, HoloError> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(HoloError::InvalidOperator("empty matrix".into()));
        }
        if m.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(HoloError::InvalidOperator("non-finite matrix entry".into()));
        }
        Ok(Self::Matrix(m))
    }
}

/// `diag(α β^k)` of size `(D+1)²`.
pub fn rotation_matrix(alpha: Complex64, beta: Complex64, degree: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(degree + 1, degree + 1);
    let mut pw = alpha;
    for k in 0..=degree {
        m[(k, k)] = pw;
        pw *= beta;
    }
    m
}

/// Result of [`apply_operator_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub function: TaylorFunction,
    /// ℓ¹ norm of the coefficients dropped at the degree budget.
    pub truncation_norm: f64,
}

/// [`apply_operator_with`] at the default degree budget and tolerance `1e−12`.
pub fn apply_operator(t: &DiscOperator, f: &TaylorFunction) -> Result<TaylorFunction, HoloError> {
    Ok(apply_operator_with(t, f, DEFAULT_DEGREE.max(f.degree_bound()), 1e-12)?.function)
}

pub fn apply_operator_with(
    t: &DiscOperator,
    f: &TaylorFunction,
    budget: usize,
    tol: f64,
) -> Result<Applied, HoloError> {
    match t {
        DiscOperator::Rotation { alpha, beta } => {
            let mut pw = *alpha;
            let coeffs = f
                .coeffs()
                .iter()
                .map(|c| {
                    let v = c * pw;
                    pw *= beta;
                    v
                })
                .collect();
            Ok(Applied {
                function: TaylorFunction::new(coeffs)?,
                truncation_norm: 0.0,
            })
        }
        DiscOperator::WeightedComposition { multiplier, symbol } => {
            let full = multiplier.mul(&f.compose(symbol));
            let (function, truncation_norm) = full.truncate(budget);
            if truncation_norm > tol {
                return Err(HoloError::TruncationOverflow {
                    norm: truncation_norm,
                    tol,
                    budget,
                });
            }
            Ok(Applied {
                function,
                truncation_norm,
            })
        }
        DiscOperator::Matrix(m) => {
            let input = f.trimmed();
            if input.len() > m.ncols() {
                return Err(HoloError::DimensionMismatch {
                    degree: input.len() - 1,
                    size: m.ncols(),
                });
            }
            let coeffs = (0..m.nrows())
                .map(|i| (0..input.len()).map(|j| m[(i, j)] * input[j]).sum())
                .collect();
            Ok(Applied {
                function: TaylorFunction::new(coeffs)?,
                truncation_norm: 0.0,
            })
        }
    }
}

/// A linear map known only through its action.
pub trait DiscMap {
    fn apply(&self, f: &TaylorFunction) -> Result<TaylorFunction, HoloError>;
}

impl DiscMap for DiscOperator {
    fn apply(&self, f: &TaylorFunction) -> Result<TaylorFunction, HoloError> {
        apply_operator(self, f)
    }
}

impl<F: Fn(&TaylorFunction) -> Result<TaylorFunction, HoloError>> DiscMap for F {
    fn apply(&self, f: &TaylorFunction) -> Result<TaylorFunction, HoloError> {
        self(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryReport {
    pub max_abs_gap: f64,
    pub max_rel_gap: f64,
    pub worst_probe: usize,
    pub worst_radius: f64,
    pub passed: bool,
}

/// Compares `‖Tf‖` with `‖f‖` for every probe and radius; passes when every
/// gap is at most `tol · max(1, ‖f‖)`.
pub fn isometry_test(
    t: &dyn DiscMap,
    family: Family,
    exh: &DiscExhaustion,
    probes: &[TaylorFunction],
    tol: f64,
) -> Result<IsometryReport, HoloError> {
    family.validate()?;
    if probes.is_empty() {
        return Err(HoloError::InvalidParameter("no probes".into()));
    }
    let mut rep = IsometryReport {
        max_abs_gap: 0.0,
        max_rel_gap: 0.0,
        worst_probe: 0,
        worst_radius: exh.radii()[0],
        passed: true,
    };
    for (i, f) in probes.iter().enumerate() {
        let image = t.apply(f)?;
        let q = exh.samples_for(f).max(exh.samples_for(&image));
        for &r in exh.radii() {
            let a = family.seminorm(f, r, q);
            let b = family.seminorm(&image, r, q);
            let gap = (a - b).abs();
            if gap > rep.max_abs_gap {
                rep.max_abs_gap = gap;
                rep.worst_probe = i;
                rep.worst_radius = r;
            }
            if a > 0.0 {
                rep.max_rel_gap = rep.max_rel_gap.max(gap / a);
            }
            if gap > tol * a.max(1.0) {
                rep.passed = false;
            }
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckName {
    Constancy,
    Unimodularity,
    CirclePreservation,
    Linearity,
    Reconstruction,
    Isometry,
}

impl CheckName {
    pub fn key(self) -> &'static str {
        match self {
            CheckName::Constancy => "constancy",
            CheckName::Unimodularity => "unimodularity",
            CheckName::CirclePreservation => "circle_preservation",
            CheckName::Linearity => "linearity",
            CheckName::Reconstruction => "reconstruction",
            CheckName::Isometry => "isometry",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckRecord {
    pub name: CheckName,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub family: Family,
    /// `(r, ‖T𝟙‖_r)` on the exhaustion radii.
    pub image_of_one: Vec<(f64, f64)>,
    pub circle_radii: Vec<f64>,
    pub checks: Vec<CheckRecord>,
    /// Set for `H^p` with `p = 2`, where equal circle means do not force the
    /// rotation form.
    pub no_theorem_guarantee: bool,
}

impl Certificate {
    pub fn check(&self, name: CheckName) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    pub scalar_alpha: Complex64,
    pub scalar_beta: Complex64,
    pub certificate: Certificate,
}

/// Tolerance of the characterization checks.
pub const CHARACTERIZE_TOL: f64 = 1e-10;
const RECONSTRUCTION_PROBES: usize = 8;
const RECONSTRUCTION_SEED: u64 = 0x5eed;

/// Recovers `T = T_{α,β}` from the action of `T` alone: `α = T(𝟙)` must be
/// a unimodular constant and `φ = ᾱ T(z)` must preserve three circles and be
/// linear, giving `β = φ'(0)`. The fit is then confirmed on seeded probes.
pub fn characterize_isometry(
    t: &dyn DiscMap,
    exh: &DiscExhaustion,
    family: Family,
) -> Result<Characterization, HoloError> {
    family.validate()?;
    let tol = CHARACTERIZE_TOL;
    let mut cert = Certificate {
        family,
        image_of_one: Vec::new(),
        circle_radii: circle_radii(exh.radii()),
        checks: Vec::new(),
        no_theorem_guarantee: matches!(family, Family::Hp(p) if p == 2.0),
    };
    let record = |cert: &mut Certificate, name: CheckName, residual: f64| -> Result<(), HoloError> {
        let passed = residual <= tol;
        cert.checks.push(CheckRecord {
            name,
            residual,
            passed,
        });
        if passed {
            Ok(())
        } else {
            Err(HoloError::NotCharacterizable {
                check: name,
                residual,
                certificate: Box::new(cert.clone()),
            })
        }
    };

    let g0 = t.apply(&TaylorFunction::one())?;
    let q = exh.samples_for(&g0);
    cert.image_of_one = exh.radii().iter().map(|&r| (r, family.seminorm(&g0, r, q))).collect();
    let c0 = g0.coeff(0);
    let scale = c0.norm() + g0.tail_mass();
    let constancy = if scale > 0.0 { g0.tail_mass() / scale } else { 1.0 };
    record(&mut cert, CheckName::Constancy, constancy)?;
    record(&mut cert, CheckName::Unimodularity, (c0.norm() - 1.0).abs())?;
    let alpha = c0 / c0.norm();

    let phi = t.apply(&TaylorFunction::identity())?.scale(alpha.conj());
    let q = samples_for_degree(phi.degree_bound());
    let circle = cert
        .circle_radii
        .iter()
        .flat_map(|&r| phi.circle_values(r, q).into_iter().map(move |v| (v.norm() - r).abs()))
        .fold(0.0, f64::max);
    record(&mut cert, CheckName::CirclePreservation, circle)?;
    let c1 = phi.coeff(1);
    let linearity = (phi.l1_norm() - c1.norm()) / phi.l1_norm().max(f64::MIN_POSITIVE);
    record(&mut cert, CheckName::Linearity, linearity)?;
    let beta = c1 / c1.norm();

    let rotation = DiscOperator::Rotation { alpha, beta };
    let probes = reconstruction_probes(exh);
    let mut recon: f64 = 0.0;
    for f in &probes {
        let image = t.apply(f)?;
        let expect = apply_operator(&rotation, f)?;
        let diff = image.sub(&expect);
        recon = recon.max(diff.l1_norm() / f.l1_norm());
    }
    record(&mut cert, CheckName::Reconstruction, recon)?;

    let mut all = vec![TaylorFunction::one(), TaylorFunction::identity()];
    all.extend(probes);
    let iso = isometry_test(t, family, exh, &all, tol)?;
    record(&mut cert, CheckName::Isometry, iso.max_rel_gap)?;

    Ok(Characterization {
        scalar_alpha: alpha,
        scalar_beta: beta,
        certificate: cert,
    })
}

/// Three circles for the preservation check: the first three exhaustion
/// radii, completed with geometric means when fewer are given.
fn circle_radii(radii: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = radii.iter().take(3).copied().collect();
    while out.len() < 3 {
        let extra = match out.as_slice() {
            [r] => vec![r * r, r.sqrt()],
            [a, b] => vec![(a * b).sqrt()],
            _ => unreachable!("radii are nonempty"),
        };
        out.extend(extra);
        out.sort_by(f64::total_cmp);
    }
    out.truncate(3);
    out
}

fn reconstruction_probes(exh: &DiscExhaustion) -> Vec<TaylorFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(RECONSTRUCTION_SEED);
    let degree = (exh.circle_samples() / 4).clamp(1, 16);
    (0..RECONSTRUCTION_PROBES)
        .map(|_| super::random_polynomial(degree, &mut rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exh() -> DiscExhaustion {
        DiscExhaustion::standard(3, 32).unwrap()
    }

    #[test]
    fn rotation_examples() {
        let t = DiscOperator::rotation(c(0.0, 1.0), c(-1.0, 0.0)).unwrap();
        let out = apply_operator(&t, &TaylorFunction::identity()).unwrap();
        assert_eq!(out.coeffs(), &[c(0.0, 0.0), c(0.0, -1.0)]);
        let alpha = Complex64::from_polar(1.0, 0.4);
        let t = DiscOperator::rotation(alpha, c(0.0, 1.0)).unwrap();
        assert_eq!(apply_operator(&t, &TaylorFunction::one()).unwrap(), TaylorFunction::constant(alpha));
        assert!(DiscOperator::rotation(c(2.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn weighted_composition_matches_rotation() {
        let beta = Complex64::from_polar(1.0, 1.3);
        let wc = DiscOperator::weighted_composition(TaylorFunction::one(), TaylorFunction::monomial(beta, 1)).unwrap();
        let rot = DiscOperator::rotation(c(1.0, 0.0), beta).unwrap();
        let f = TaylorFunction::new((0..10).map(|k| c(k as f64 * 0.1, 1.0 - k as f64 * 0.05)).collect()).unwrap();
        let a = apply_operator(&wc, &f).unwrap();
        let b = apply_operator(&rot, &f).unwrap();
        assert!(a.sub(&b).l1_norm() < 1e-14);
        assert!(DiscOperator::weighted_composition(TaylorFunction::one(), TaylorFunction::from_real(&[0.5, 0.6]).unwrap()).is_err());
    }

    #[test]
    fn truncation_budget() {
        let sq = DiscOperator::weighted_composition(TaylorFunction::one(), TaylorFunction::monomial(c(1.0, 0.0), 2)).unwrap();
        let f = TaylorFunction::monomial(c(1.0, 0.0), 5);
        assert!(matches!(
            apply_operator_with(&sq, &f, 8, 1e-12),
            Err(HoloError::TruncationOverflow { .. })
        ));
        let ok = apply_operator_with(&sq, &f, 10, 1e-12).unwrap();
        assert_eq!(ok.truncation_norm, 0.0);
    }

    #[test]
    fn isometry_test_examples() {
        let probes = vec![
            TaylorFunction::one(),
            TaylorFunction::identity(),
            TaylorFunction::from_real(&[1.0, -0.5, 0.25, 0.3]).unwrap(),
        ];
        let rot = DiscOperator::rotation(Complex64::from_polar(1.0, 2.0), Complex64::from_polar(1.0, -0.7)).unwrap();
        for fam in [Family::Sup, Family::Hp(1.0), Family::Hp(2.0), Family::Hp(3.0)] {
            assert!(isometry_test(&rot, fam, &exh(), &probes, 1e-12).unwrap().passed);
        }
        let double = DiscOperator::matrix(DMatrix::identity(33, 33) * c(2.0, 0.0)).unwrap();
        let rep = isometry_test(&double, Family::Sup, &exh(), &probes[..1], 1e-12).unwrap();
        assert!(!rep.passed);
        assert!((rep.max_abs_gap - 1.0).abs() < 1e-15);

        let sq = DiscOperator::weighted_composition(
            TaylorFunction::constant(Complex64::from_polar(1.0, 0.3)),
            TaylorFunction::monomial(c(1.0, 0.0), 2),
        )
        .unwrap();
        let rep = isometry_test(&sq, Family::Sup, &exh(), &probes[1..2], 1e-12).unwrap();
        assert!(!rep.passed);
        assert!((rep.max_abs_gap - 0.25).abs() < 1e-15);
        assert_eq!(rep.worst_radius, 0.5);
    }

    #[test]
    fn characterize_opaque_rotation() {
        let alpha = Complex64::from_polar(1.0, PI / 3.0);
        let beta = Complex64::from_polar(1.0, SQRT_2);
        let t = DiscOperator::matrix(rotation_matrix(alpha, beta, 32)).unwrap();
        for fam in [Family::Sup, Family::Hp(1.0), Family::Hp(3.0)] {
            let ch = characterize_isometry(&t, &exh(), fam).unwrap();
            assert!((ch.scalar_alpha - alpha).norm() < 1e-10);
            assert!((ch.scalar_beta - beta).norm() < 1e-10);
            assert!(!ch.certificate.no_theorem_guarantee);
        }
        let ch = characterize_isometry(&t, &exh(), Family::Hp(2.0)).unwrap();
        assert!(ch.certificate.no_theorem_guarantee);
    }

    #[test]
    fn characterize_restricted_radii() {
        let alpha = Complex64::from_polar(1.0, -1.0);
        let beta = Complex64::from_polar(1.0, 2.5);
        let t = DiscOperator::matrix(rotation_matrix(alpha, beta, 32)).unwrap();
        let full = characterize_isometry(&t, &DiscExhaustion::standard(6, 32).unwrap(), Family::Sup).unwrap();
        let two = characterize_isometry(&t, &DiscExhaustion::from_indices(&[2, 3], 32).unwrap(), Family::Sup).unwrap();
        assert_eq!(full.scalar_alpha, two.scalar_alpha);
        assert_eq!(full.scalar_beta, two.scalar_beta);
        assert_eq!(two.certificate.circle_radii.len(), 3);
    }

    #[test]
    fn characterize_identity_and_failures() {
        let id = DiscOperator::matrix(DMatrix::identity(33, 33)).unwrap();
        let ch = characterize_isometry(&id, &exh(), Family::Sup).unwrap();
        assert_eq!((ch.scalar_alpha, ch.scalar_beta), (c(1.0, 0.0), c(1.0, 0.0)));

        let double = DiscOperator::matrix(DMatrix::identity(33, 33) * c(2.0, 0.0)).unwrap();
        match characterize_isometry(&double, &exh(), Family::Hp(1.0)) {
            Err(HoloError::NotCharacterizable { check, certificate, .. }) => {
                assert_eq!(check, CheckName::Unimodularity);
                assert!(certificate.check(CheckName::Constancy).unwrap().passed);
                for (_, m) in &certificate.image_of_one {
                    assert!((m - 2.0).abs() < 1e-15);
                }
            }
            other => panic!("{other:?}"),
        }

        let sq = DiscOperator::weighted_composition(TaylorFunction::one(), TaylorFunction::monomial(c(1.0, 0.0), 2)).unwrap();
        assert!(matches!(
            characterize_isometry(&sq, &exh(), Family::Sup),
            Err(HoloError::NotCharacterizable { check: CheckName::CirclePreservation, .. })
        ));

        let shifted = |f: &TaylorFunction| Ok(f.add(&TaylorFunction::identity().scale(c(0.1, 0.0))));
        assert!(matches!(
            characterize_isometry(&shifted, &exh(), Family::Sup),
            Err(HoloError::NotCharacterizable { check: CheckName::Constancy, .. })
        ));
    }

    #[test]
    fn circle_radii_completion() {
        assert_eq!(circle_radii(&[0.5, 2.0 / 3.0, 0.75, 0.8]), vec![0.5, 2.0 / 3.0, 0.75]);
        let two = circle_radii(&[0.25, 0.5]);
        assert_eq!(two.len(), 3);
        assert!(two.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(circle_radii(&[0.5]).len(), 3);
    }
}
