//! Hand-checkable cases behind `--selftest`, grouped by module.

use std::f64::consts::{E, LN_2, PI};

use num_complex::Complex64;

use crate::contspace::{
    build_annulus_homeo, build_interval_homeo, decomposition_bound_check, isometry_test_grid, recover_h_phi,
    sup_seminorm_grid, weighted_composition_grid, AnnulusDeformation, ContError, Exhaustion1D, ExhaustionDisc,
    Grid, GridFunction, Orientation, PointMap, RecoveryCheck, WeightedComposition,
};
use crate::holodisc::{
    characterize_isometry, isometry_test, strict_monotonicity_check, three_circle_check, DiscExhaustion, DiscMap,
    DiscOperator, Family, TaylorFunction,
};
use crate::measure::{hu_curve, recover_measure, roundtrip_check, sample_moment_data, LogMeasure, RecoverySpec};
use crate::metric::{
    count_support_start, measures_from_vectors, metric_value, moment_curve, separate, SeminormVector,
    SeparationResult, WeightSequence,
};
use crate::quadrature::QuadratureSpec;
use crate::theta::{check_admissibility, frullani_integral, gu_fourier, gu_kernel, pair_grid, ThetaGauge};

use super::config::ExperimentConfig;
use super::format::Report;
use super::{execute, Figure, Outcome};

type Case = (&'static str, bool);

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn theta_cases() -> Vec<Case> {
    let quad = QuadratureSpec::default();
    let clip = ThetaGauge::clip();
    let exp = ThetaGauge::exp();
    let rat1 = ThetaGauge::rational(1.0).expect("positive exponent");
    let grid: Vec<f64> = (1..=100).map(|i| i as f64 / 10.0).collect();
    let fr = |g: &ThetaGauge, rho: f64| frullani_integral(g, rho, &quad).map(|e| e.value).unwrap_or(f64::NAN);
    let u = 1.0;
    let ys: Vec<f64> = (-40..=40).map(|i| i as f64 / 4.0).collect();
    let reality = [Complex64::new(0.7, 0.0), Complex64::new(-1.3, 0.2), Complex64::new(2.0, -0.3)]
        .iter()
        .all(|&z| match (gu_fourier(&exp, u, z, &quad), gu_fourier(&exp, u, -z.conj(), &quad)) {
            (Ok(a), Ok(b)) => (a.conj() - b).norm() < 1e-8,
            _ => false,
        });
    vec![
        ("clip_half", clip.value(0.5) == 0.5),
        ("rational1_at_one", rat1.value(1.0) == 0.5),
        ("exp_at_zero", exp.value(0.0) == 0.0),
        ("clip_admissible", check_admissibility(&clip, &grid, &pair_grid(&grid), &quad).passed),
        ("frullani_exp_e", close(fr(&exp, E), 1.0, 1e-8)),
        ("frullani_clip_2", close(fr(&clip, 2.0), LN_2, 1e-8)),
        ("log_gauge_clip", clip.log_gauge(0.0) == 1.0),
        ("log_gauge_rational1", rat1.log_gauge(0.0) == 0.5),
        (
            "kernel_nonnegative",
            ThetaGauge::builtins().iter().all(|g| ys.iter().all(|&y| gu_kernel(g, u, y) >= 0.0)),
        ),
        ("kernel_clip", close(gu_kernel(&clip, LN_2, -LN_2), 0.5, 1e-15)),
        (
            "fourier_at_zero",
            gu_fourier(&exp, u, Complex64::new(0.0, 0.0), &quad).is_ok_and(|v| close(v.re, u, 1e-8)),
        ),
        ("fourier_reality", reality),
    ]
}

fn metric_cases() -> Vec<Case> {
    let clip = ThetaGauge::clip();
    let half = WeightSequence::new(vec![0.5, 0.5], 0.0).expect("weights");
    let sv = |v: &[f64]| SeminormVector::new(v.to_vec()).expect("finite entries");
    let tailed = WeightSequence::new(vec![0.5, 0.25], 0.25).expect("weights");
    let zero_value = metric_value(&clip, &tailed, &sv(&[0.0, 0.0]));
    let one = metric_value(&clip, &half, &sv(&[1.0, 2.0]));
    let unit = WeightSequence::new(vec![1.0], 0.0).expect("weights");
    let grid: Vec<f64> = (1..=50).map(|i| i as f64 / 5.0).collect();
    let same = separate(&clip, &half, &sv(&[1.0, 2.0]), &sv(&[1.0, 2.0]), &grid);
    let start_pos = count_support_start(&clip, &half, &sv(&[1.0, 2.0]), 1e6);
    let start_zero = count_support_start(&clip, &half, &sv(&[0.0, 0.0]), 1e6);
    let merged = measures_from_vectors(&half, &sv(&[2.0, 2.0]));
    let quarter = WeightSequence::new(vec![0.5, 0.25, 0.25], 0.0).expect("weights");
    let three = measures_from_vectors(&quarter, &sv(&[1.0, 2.0, 3.0]));
    vec![
        ("zero_vector", zero_value.is_ok_and(|m| m.lo == 0.0 && m.hi == 0.25)),
        ("clip_saturates", one.is_ok_and(|m| m.lo == 1.0 && m.hi == 1.0)),
        (
            "curve_at_one",
            moment_curve(&clip, &half, &sv(&[0.3, 0.9]), 1.0).ok()
                == metric_value(&clip, &half, &sv(&[0.3, 0.9])).ok().map(|m| m.lo),
        ),
        ("curve_quarter", moment_curve(&clip, &unit, &sv(&[1.0]), 0.25).is_ok_and(|v| v == 0.25)),
        ("identical_not_separated", matches!(same, Ok(SeparationResult::NotSeparated { max_gap }) if max_gap == 0.0)),
        ("support_start_positive", start_pos.is_ok_and(|s| s.index == 0)),
        ("support_start_empty", start_zero.is_ok_and(|s| s.index == 2)),
        ("merge_coincident", merged.is_ok_and(|m| m.atoms() == [2.0] && m.masses() == [1.0])),
        (
            "three_atoms",
            three.is_ok_and(|m| m.atoms() == [1.0, 2.0, 3.0] && m.masses() == [0.5, 0.25, 0.25]),
        ),
    ]
}

fn measure_cases() -> Vec<Case> {
    let g = ThetaGauge::rational(2.0).expect("positive exponent");
    let spec = RecoverySpec::default();
    let u = spec.u;
    let ss = [-3.0, -0.5, 0.0, 1.7, 4.0];
    let dirac = LogMeasure::dirac(0.0);
    let dirac_ok = ss
        .iter()
        .all(|&s| hu_curve(&g, &dirac, u, s).is_ok_and(|v| close(v, gu_kernel(&g, u, s), 1e-15)));
    let pair = LogMeasure::new(vec![-LN_2, LN_2], vec![0.5, 0.5]).expect("valid measure");
    let pair_ok = ss.iter().all(|&s| {
        let want = 0.5 * gu_kernel(&g, u, s + LN_2) + 0.5 * gu_kernel(&g, u, s - LN_2);
        hu_curve(&g, &pair, u, s).is_ok_and(|v| close(v, want, 1e-15))
    });
    let single = sample_moment_data(&g, &dirac, u, &spec)
        .ok()
        .and_then(|d| recover_measure(&g, &d, &spec, 4).ok())
        .is_some_and(|r| {
            r.measure.len() == 1 && r.measure.log_atoms()[0].abs() < 1e-6 && close(r.measure.masses()[0], 1.0, 1e-6)
        });
    let roundtrip = roundtrip_check(&g, &dirac, &spec, 4).is_ok_and(|r| r.max_atom_error < 1e-6 && r.max_mass_error < 1e-6);
    let alias_spec = RecoverySpec {
        window: (-60.0, 60.0),
        ..RecoverySpec::default()
    };
    let alias = LogMeasure::new(vec![-50.0, -50.0 + 32.0 * PI], vec![0.5, 0.5]).expect("valid measure");
    let flagged = roundtrip_check(&g, &alias, &alias_spec, 4).is_err();
    vec![
        ("dirac_curve", dirac_ok),
        ("two_atom_linearity", pair_ok),
        ("single_atom_recovery", single),
        ("single_atom_roundtrip", roundtrip),
        ("ambiguity_flagged", flagged),
    ]
}

fn holodisc_cases() -> Vec<Case> {
    let z = TaylorFunction::identity();
    let one = TaylorFunction::one();
    let z3 = TaylorFunction::monomial(Complex64::new(1.0, 0.0), 3);
    let i = Complex64::new(0.0, 1.0);
    let q = 64;
    let radii = [0.1, 0.5, 0.9];
    let rot = DiscOperator::rotation(i, Complex64::new(-1.0, 0.0)).expect("unimodular");
    let rz = rot.apply(&z).ok();
    let r1 = rot.apply(&one).ok();
    let exh = DiscExhaustion::new(vec![0.25, 0.5, 0.75], q).expect("radii");
    let probes = vec![z.clone(), z3.clone(), one.add(&z3.scale(Complex64::new(0.5, -0.2)))];
    let iso = [Family::Sup, Family::Hp(1.0), Family::Hp(3.0)]
        .iter()
        .all(|&fam| isometry_test(&rot, fam, &exh, &probes, 1e-12).is_ok_and(|r| r.passed));
    let two = DiscOperator::matrix(nalgebra::DMatrix::identity(8, 8) * Complex64::new(2.0, 0.0)).expect("matrix");
    let doubled = isometry_test(&two, Family::Sup, &exh, &probes, 1e-12).is_ok_and(|r| {
        !r.passed && close(r.max_abs_gap, probes.iter().map(|f| Family::Sup.seminorm(f, 0.75, q)).fold(0.0, f64::max), 1e-9)
    });
    let ident = DiscOperator::rotation(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).expect("unimodular");
    let ch = characterize_isometry(&ident, &exh, Family::Sup)
        .is_ok_and(|c| (c.scalar_alpha - 1.0).norm() < 1e-10 && (c.scalar_beta - 1.0).norm() < 1e-10);
    let five = z3.scale(Complex64::new(5.0, 0.0));
    let tc = three_circle_check(&five, [0.25, 0.5, 0.75], q, 1e-10);
    let tc1 = three_circle_check(&one, [0.25, 0.5, 0.75], q, 1e-10);
    vec![
        ("sup_monomial", radii.iter().all(|&r| close(Family::Sup.seminorm(&z3, r, q), r.powi(3), 1e-15))),
        ("sup_one", Family::Sup.seminorm(&one, 0.5, q) == 1.0),
        (
            "hp_coordinate",
            [1.0, 2.0, 4.5].iter().all(|&p| close(Family::Hp(p).seminorm(&z, 0.6, q), 0.6, 1e-14)),
        ),
        ("hp_one", [1.0, 2.0, 4.5].iter().all(|&p| close(Family::Hp(p).seminorm(&one, 0.3, q), 1.0, 1e-14))),
        (
            "constant_curve",
            strict_monotonicity_check(&one, 2.0, &radii, q).is_ok_and(|m| m.passed && m.values.iter().all(|v| close(*v, 1.0, 1e-15))),
        ),
        (
            "coordinate_increasing",
            strict_monotonicity_check(&z, 2.0, &radii, q).is_ok_and(|m| m.passed && m.min_gap > 0.0),
        ),
        (
            "rotation_coordinate",
            rz.is_some_and(|f| f.coeff(0).norm() < 1e-15 && (f.coeff(1) + i).norm() < 1e-15),
        ),
        ("rotation_one", r1.is_some_and(|f| f.is_constant() && (f.coeff(0) - i).norm() < 1e-15)),
        ("rotation_isometry", iso),
        ("doubling_fails", doubled),
        ("identity_parameters", ch),
        ("monomial_rigid", tc.is_ok_and(|t| t.slack.abs() < 1e-12 && t.rigidity_flag)),
        ("constant_slack", tc1.is_ok_and(|t| t.slack.abs() < 1e-12)),
    ]
}

fn contspace_cases() -> Vec<Case> {
    let exh = Exhaustion1D::standard();
    let grid = Grid::interval(&exh, 512, &[]).expect("grid");
    let c = Complex64::new(0.6, -0.8);
    let constant = GridFunction::constant(&grid, c);
    let const_ok = (0..exh.levels()).all(|l| sup_seminorm_grid(&constant, l).is_ok_and(|v| close(v, 1.0, 1e-15)));
    let x = GridFunction::coordinate(&grid);
    let k0 = Exhaustion1D::new(vec![(0.2, 0.8)]).expect("level");
    let g0 = Grid::interval(&k0, 301, &[]).expect("grid");
    let x0 = GridFunction::coordinate(&g0);
    let disc = ExhaustionDisc::new(vec![0.25, 0.8]).expect("radii");
    let dg = Grid::disc(&disc, 32, 64).expect("grid");
    let zd = GridFunction::coordinate(&dg);
    let id = |z: Complex64| z;
    let one = GridFunction::one(&grid);
    let wave = GridFunction::from_fn(&grid, |z| Complex64::from_polar(1.0, 2.0 * PI * z.re));
    let unchanged = weighted_composition_grid(&one, &id, &x).is_ok_and(|f| f == x);
    let waved = weighted_composition_grid(&wave, &id, &one).is_ok_and(|f| f == wave);
    let zero = |f: &GridFunction| -> Result<GridFunction, ContError> { Ok(f.map_values(|_| Complex64::new(0.0, 0.0))) };
    let probes = vec![x.clone(), wave.clone()];
    let zero_fails = isometry_test_grid(&zero, &probes, 1e-12).is_ok_and(|r| !r.passed);
    let identity = WeightedComposition::new(one.clone(), &id).expect("identity map");
    let recovered = recover_h_phi(&identity, &grid, &probes).is_ok_and(|p| {
        p.h.values().iter().all(|v| (v - 1.0).norm() < 1e-12)
            && p.phi.iter().zip(grid.points()).all(|(a, b)| (a - b).norm() < 1e-12)
    });
    let zero_rejected = matches!(
        recover_h_phi(&zero, &grid, &probes),
        Err(ContError::NotWeightedComposition { check: RecoveryCheck::Unimodular, .. })
    );
    let plain = build_interval_homeo(&exh, Orientation::Increasing, &[]);
    let fixes = plain.is_ok_and(|p| exh.bounds().iter().all(|b| p.eval(*b) == *b));
    let still = build_annulus_homeo(&disc, &[AnnulusDeformation::triangle_twist(&disc, 0, 0.0)]);
    let still_ok = still.is_ok_and(|h| dg.points().iter().all(|z| (h.map(*z) - z).norm() < 1e-15));
    let broken = AnnulusDeformation {
        annulus: 0,
        twist: vec![(0.25, 0.4), (0.8, 0.0)],
        radial: Vec::new(),
    };
    let rejected = matches!(build_annulus_homeo(&disc, &[broken]), Err(ContError::Discontinuous(_)));
    let tight = decomposition_bound_check(&identity, &probes, 1e-12)
        .is_ok_and(|r| r.passed && r.worst_slack.abs() < 1e-12 && close(r.dual_norm, 1.0, 1e-12));
    vec![
        ("constant_sup", const_ok),
        ("coordinate_sup", sup_seminorm_grid(&x0, 0).is_ok_and(|v| close(v, 0.8, 1e-15))),
        ("disc_sup", sup_seminorm_grid(&zd, 0).is_ok_and(|v| close(v, 0.25, 1e-15))),
        ("identity_composition", unchanged),
        ("weight_only", waved),
        ("zero_not_isometry", zero_fails),
        ("identity_recovered", recovered),
        ("zero_rejected", zero_rejected),
        ("homeo_no_controls", fixes),
        ("zero_twist", still_ok),
        ("discontinuous_twist", rejected),
        ("identity_bound_tight", tight),
    ]
}

fn cli_cases() -> Vec<Case> {
    let cfg = ExperimentConfig::default();
    let theta = execute("theta-check", &cfg, None).is_ok_and(|o| o.passed);
    let fig = execute("emit-figure", &cfg, Some(Figure::Fig1)).is_ok_and(|o| {
        o.passed
            && o.files.iter().any(|(n, c)| {
                n == "fig1.csv" && c.starts_with("t,theta_clip,theta_exp,theta_rational1\n") && c.lines().count() == 502
            })
    });
    vec![("theta_check_clip", theta), ("fig1", fig)]
}

fn module_for(command: &str) -> &'static str {
    match command {
        "theta-check" | "frullani" => "theta",
        "separate" => "metric",
        "recover-measure" => "measure",
        "hol-iso-test" | "hol-characterize" | "three-circle" => "holodisc",
        "cu-iso-test" | "cu-recover" | "cu-decomp-bound" => "contspace",
        _ => "cli",
    }
}

pub fn run(command: &str) -> Outcome {
    let module = module_for(command);
    let cases = match module {
        "theta" => theta_cases(),
        "metric" => metric_cases(),
        "measure" => measure_cases(),
        "holodisc" => holodisc_cases(),
        "contspace" => contspace_cases(),
        _ => cli_cases(),
    };
    let mut r = Report::new(command);
    r.text("selftest", module).int("cases", cases.len());
    for (name, ok) in &cases {
        r.flag(format!("case.{name}"), *ok);
    }
    let passed = cases.iter().all(|(_, ok)| *ok);
    Outcome::new(r, passed)
}
