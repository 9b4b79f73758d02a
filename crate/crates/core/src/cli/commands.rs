//! One function per subcommand, each turning a config into an [`Outcome`].

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contspace::probes::{probe_functions, random_annulus_homeo, random_interval_homeo, random_unimodular};
use crate::contspace::{
    build_annulus_homeo, build_interval_homeo, decomposition_bound_check, isometry_test_grid,
    recover_h_phi, zigzag_fold, AnnulusDeformation, ContError, Domain, Exhaustion1D, ExhaustionDisc, Grid,
    GridFunction, GridMap, Orientation, PointMap, WeightedComposition,
};
use crate::holodisc::{
    characterize_isometry, isometry_test, random_polynomial, rotation_matrix, samples_for_degree,
    three_circle_check, DiscExhaustion, DiscMap, DiscOperator, Family, HoloError, TaylorFunction, RIGIDITY_TOL,
};
use crate::measure::{recover_measure as recover_measure_fn, roundtrip_check, sample_moment_data, LogMeasure, MeasureError, MomentData};
use crate::metric::{
    measures_from_vectors, metric_value, moment_curve, separate_with_tolerance, SeminormVector, SeparationResult,
    WeightSequence, SEPARATION_TOL,
};
use crate::quadrature::QuadratureSpec;
use crate::theta::{check_admissibility, frullani_integral, log_grid, pair_grid, ThetaGauge};

use super::config::ExperimentConfig;
use super::format::{self, num, Report};
use super::{CliError, Figure, Outcome};

fn invalid(context: &str) -> impl Fn(String) -> CliError + '_ {
    move |e| CliError::Invalid(format!("{context}: {e}"))
}

fn gauge_of(cfg: &ExperimentConfig, default: &str) -> Result<ThetaGauge, CliError> {
    ThetaGauge::parse(cfg.gauge.as_deref().unwrap_or(default)).map_err(|e| CliError::Invalid(format!("gauge: {e}")))
}

fn quad(cfg: &ExperimentConfig) -> QuadratureSpec {
    QuadratureSpec {
        tolerance: cfg.theta.quad_tolerance,
        ..QuadratureSpec::default()
    }
}

fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn header(command: &str, cfg: &ExperimentConfig) -> Report {
    let mut r = Report::new(command);
    r.int("seed", cfg.seed);
    r
}

fn read(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn theta_check(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let g = gauge_of(cfg, "clip")?;
    let th = &cfg.theta;
    let grid = log_grid(th.grid_lo, th.grid_hi, th.grid_points);
    let rep = check_admissibility(&g, &grid, &pair_grid(&grid), &quad(cfg));
    let mut r = header("theta-check", cfg);
    r.text("gauge", g.name())
        .float("alpha", g.growth_exponent())
        .float("small_threshold", g.small_threshold())
        .float("large_threshold", g.large_threshold())
        .float("small_constant", g.small_constant())
        .float("large_constant", g.large_constant())
        .float("grid.lo", th.grid_lo)
        .float("grid.hi", th.grid_hi)
        .int("grid.points", th.grid_points);
    for c in &rep.checks {
        let k = c.hypothesis.key();
        r.flag(format!("check.{k}"), c.passed)
            .float(format!("check.{k}.worst_violation"), c.worst_violation)
            .list(format!("check.{k}.worst_sample"), &c.worst_sample);
    }
    let curve = (0..=500).map(|i| {
        let t = i as f64 / 100.0;
        vec![num(t), num(g.value(t))]
    });
    Ok(Outcome::new(r, rep.passed).with_file("theta_curve.csv", format::csv(&["t", "theta"], curve)))
}

pub fn frullani(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let g = gauge_of(cfg, "clip")?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let mut r = header("frullani", cfg);
    r.text("gauge", g.name()).float("tol", tol);
    let mut ok = true;
    for (i, &rho) in cfg.theta.rho.iter().enumerate() {
        let est = frullani_integral(&g, rho, &quad(cfg)).map_err(|e| CliError::Invalid(format!("theta.rho: {e}")))?;
        let diff = (est.value - rho.ln()).abs();
        ok &= diff < tol;
        r.float(format!("rho.{i}"), rho)
            .float(format!("rho.{i}.integral"), est.value)
            .float(format!("rho.{i}.error_estimate"), est.error)
            .float(format!("rho.{i}.ln_rho"), rho.ln())
            .float(format!("rho.{i}.deviation"), diff)
            .flag(format!("rho.{i}.check"), diff < tol);
    }
    Ok(Outcome::new(r, ok))
}

fn vector(inline: &[f64], path: &Option<std::path::PathBuf>, what: &str) -> Result<Vec<f64>, CliError> {
    match path {
        Some(p) => format::parse_column(&read(p)?, what),
        None => Ok(inline.to_vec()),
    }
}

pub fn separate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let g = gauge_of(cfg, "clip")?;
    let m = &cfg.metric;
    let weights = vector(&m.weights, &m.weights_path, "metric.weights")?;
    let r = WeightSequence::new(weights, m.tail).map_err(|e| invalid("metric.weights")(e.to_string()))?;
    let a = SeminormVector::new(vector(&m.a, &m.a_path, "metric.a")?).map_err(|e| invalid("metric.a")(e.to_string()))?;
    let b = SeminormVector::new(vector(&m.b, &m.b_path, "metric.b")?).map_err(|e| invalid("metric.b")(e.to_string()))?;
    let tol = cfg.tol.unwrap_or(SEPARATION_TOL);
    let grid = log_grid(m.t_lo, m.t_hi, m.t_points);
    let res = separate_with_tolerance(&g, &r, &a, &b, &grid, tol).map_err(|e| invalid("metric")(e.to_string()))?;
    let bad = |e: crate::metric::MetricError| CliError::Invalid(format!("metric: {e}"));
    let mut rep = header("separate", cfg);
    rep.text("gauge", g.name()).float("tol", tol).int("t_grid.points", grid.len());
    let (da, db) = (metric_value(&g, &r, &a).map_err(bad)?, metric_value(&g, &r, &b).map_err(bad)?);
    rep.float("metric_a.lo", da.lo)
        .float("metric_a.hi", da.hi)
        .float("metric_b.lo", db.lo)
        .float("metric_b.hi", db.hi);
    let conclusive = match res {
        SeparationResult::NotSeparated { max_gap } => {
            rep.text("result", "not_separated").float("max_gap", max_gap);
            true
        }
        SeparationResult::Separated { t_star, gap } => {
            rep.text("result", "separated").float("t_star", t_star).float("gap", gap);
            true
        }
        SeparationResult::Inconclusive { t_star, max_gap } => {
            rep.text("result", "inconclusive").float("t_star", t_star).float("max_gap", max_gap);
            false
        }
    };
    if a.values().iter().chain(b.values()).all(|v| *v > 0.0) {
        let ma = measures_from_vectors(&r, &a).map_err(bad)?;
        rep.list("measure_a.atoms", ma.atoms()).list("measure_a.masses", ma.masses());
        let mb = measures_from_vectors(&r, &b).map_err(bad)?;
        rep.list("measure_b.atoms", mb.atoms()).list("measure_b.masses", mb.masses());
    }
    for (i, &t) in m.probe_t.iter().enumerate() {
        let (ca, cb) = (moment_curve(&g, &r, &a, t).map_err(bad)?, moment_curve(&g, &r, &b, t).map_err(bad)?);
        rep.float(format!("probe.{i}.t"), t)
            .float(format!("probe.{i}.curve_a"), ca)
            .float(format!("probe.{i}.curve_b"), cb)
            .float(format!("probe.{i}.gap"), (ca - cb).abs());
    }
    let rows = grid
        .iter()
        .map(|&t| {
            let ca = moment_curve(&g, &r, &a, t).map_err(bad)?;
            let cb = moment_curve(&g, &r, &b, t).map_err(bad)?;
            Ok(vec![num(t), num(ca), num(cb), num((ca - cb).abs())])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Outcome::new(rep, conclusive)
        .with_file("moment_curves.csv", format::csv(&["t", "curve_a", "curve_b", "gap"], rows)))
}

fn report_measure(r: &mut Report, prefix: &str, nu: &LogMeasure) {
    r.list(format!("{prefix}.log_atoms"), nu.log_atoms())
        .list(format!("{prefix}.masses"), nu.masses());
}

pub fn recover_measure(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let g = gauge_of(cfg, "rational:2")?;
    let ms = &cfg.measure;
    let spec = &ms.spec;
    let tol = cfg.tol.unwrap_or(1e-3);
    let mut r = header("recover-measure", cfg);
    r.text("gauge", g.name()).float("u", spec.u).float("tol", tol);
    let failure = |r: &mut Report, e: MeasureError| -> Result<Outcome, CliError> {
        match e {
            MeasureError::RecoveryFailed { reason, candidate } => {
                r.text("failure", reason)
                    .list("candidate.log_atoms", &candidate.log_atoms)
                    .list("candidate.masses", &candidate.masses)
                    .float("candidate.residual", candidate.residual);
                Ok(Outcome::new(r.clone(), false))
            }
            other => Err(CliError::Invalid(format!("measure: {other}"))),
        }
    };
    if let Some(path) = &ms.data_path {
        if !spec.extra_shifts.is_empty() {
            return Err(CliError::Invalid("measure.spec.extra_shifts: a data file carries one shift".into()));
        }
        let (s, values) = format::parse_moment_data(&read(path)?)?;
        let data = MomentData { u: spec.u, s, values };
        r.int("samples", data.s.len()).float("zero_frequency", data.transform(0.0).re);
        return match recover_measure_fn(&g, &data, spec, ms.atom_budget) {
            Ok(rec) => {
                report_measure(&mut r, "recovered", &rec.measure);
                r.float("recovered.total_mass", rec.measure.total_mass())
                    .float("residual", rec.residual)
                    .int("rank", rec.rank)
                    .int("used_frequencies", rec.used_frequencies)
                    .int("skipped_frequencies", rec.skipped_frequencies)
                    .int("iterations", rec.iterations);
                Ok(Outcome::new(r, true))
            }
            Err(e) => failure(&mut r, e),
        };
    }
    let nu = LogMeasure::new(ms.log_atoms.clone(), ms.masses.clone()).map_err(|e| invalid("measure")(e.to_string()))?;
    report_measure(&mut r, "truth", &nu);
    let data = sample_moment_data(&g, &nu, spec.u, spec).map_err(|e| invalid("measure")(e.to_string()))?;
    let file = format::write_moment_data(&data.s, &data.values);
    let outcome = match roundtrip_check(&g, &nu, spec, ms.atom_budget) {
        Ok(rt) => {
            report_measure(&mut r, "recovered", &rt.recovered);
            r.float("max_atom_error", rt.max_atom_error)
                .float("max_mass_error", rt.max_mass_error)
                .float("residual", rt.residual)
                .float("zero_frequency_error", rt.zero_frequency_error);
            let ok = rt.max_atom_error < tol && rt.max_mass_error < tol;
            Outcome::new(r, ok)
        }
        Err(e) => failure(&mut r, e)?,
    };
    Ok(outcome.with_file("moment_data.csv", file))
}

fn family_of(cfg: &ExperimentConfig) -> Result<Family, CliError> {
    let s = cfg.hol.family.trim();
    let fam = if s == "sup" {
        Family::Sup
    } else {
        let p = s
            .strip_prefix("hp:")
            .or_else(|| s.strip_prefix("hp(").map(|x| x.trim_end_matches(')')))
            .or_else(|| s.strip_prefix("hp"))
            .and_then(|p| p.parse::<f64>().ok())
            .ok_or_else(|| CliError::Invalid(format!("hol.family: expected `sup` or `hp:<p>`, got `{s}`")))?;
        Family::Hp(p)
    };
    fam.validate().map_err(|e| CliError::Invalid(format!("hol.family: {e}")))?;
    Ok(fam)
}

struct HolSetup {
    op: DiscOperator,
    exh: DiscExhaustion,
    family: Family,
    /// Known `(α, β)` when the operator was built from them.
    truth: Option<(Complex64, Complex64)>,
}

fn hol_setup(cfg: &ExperimentConfig) -> Result<HolSetup, CliError> {
    let h = &cfg.hol;
    let family = family_of(cfg)?;
    let exh = DiscExhaustion::from_indices(&h.radius_indices, h.degree)
        .map_err(|e| CliError::Invalid(format!("hol.radius_indices: {e}")))?;
    let alpha = Complex64::from_polar(1.0, h.alpha_angle);
    let beta = Complex64::from_polar(1.0, h.beta_angle);
    let bad = |e: HoloError| CliError::Invalid(format!("hol.operator: {e}"));
    let (op, truth) = match h.operator.as_str() {
        "rotation" => (DiscOperator::rotation(alpha, beta).map_err(bad)?, Some((alpha, beta))),
        "rotation-matrix" => (
            DiscOperator::matrix(rotation_matrix(alpha, beta, h.degree)).map_err(bad)?,
            Some((alpha, beta)),
        ),
        "scaled-identity" => (
            DiscOperator::matrix(DMatrix::identity(h.degree + 1, h.degree + 1) * Complex64::new(h.scale, 0.0))
                .map_err(bad)?,
            None,
        ),
        "matrix" => {
            let path = h
                .matrix_path
                .as_ref()
                .ok_or_else(|| CliError::Invalid("hol.matrix_path: required for operator `matrix`".into()))?;
            (DiscOperator::matrix(format::parse_matrix(&read(path)?)?).map_err(bad)?, None)
        }
        other => return Err(CliError::Invalid(format!("hol.operator: unknown `{other}`"))),
    };
    Ok(HolSetup { op, exh, family, truth })
}

/// Probe degree: the configured degree, capped by a matrix operator's size.
fn probe_degree(setup: &HolSetup, degree: usize) -> usize {
    match &setup.op {
        DiscOperator::Matrix(m) => degree.min(m.ncols().saturating_sub(1)),
        _ => degree,
    }
}

pub fn hol_iso_test(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let setup = hol_setup(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-10);
    let mut rng = rng(cfg);
    let deg = probe_degree(&setup, cfg.hol.degree);
    let probes: Vec<TaylorFunction> = (0..cfg.hol.probes).map(|_| random_polynomial(deg, &mut rng)).collect();
    let rep = isometry_test(&setup.op, setup.family, &setup.exh, &probes, tol)
        .map_err(|e| CliError::Invalid(format!("hol: {e}")))?;
    let mut r = header("hol-iso-test", cfg);
    r.text("family", setup.family.label())
        .text("operator", cfg.hol.operator.clone())
        .list("radii", setup.exh.radii())
        .int("probes", probes.len())
        .float("tol", tol)
        .float("max_abs_gap", rep.max_abs_gap)
        .float("max_rel_gap", rep.max_rel_gap)
        .int("worst_probe", rep.worst_probe)
        .float("worst_radius", rep.worst_radius)
        .flag("isometry", rep.passed);
    let image = setup.op.apply(&probes[0]).map_err(|e| CliError::Invalid(format!("hol: {e}")))?;
    let q = samples_for_degree(image.degree_bound().max(probes[0].degree_bound()));
    let rows = (1..=49).map(|i| {
        let rad = i as f64 / 50.0;
        vec![
            num(rad),
            num(setup.family.seminorm(&probes[0], rad, q)),
            num(setup.family.seminorm(&image, rad, q)),
        ]
    });
    Ok(Outcome::new(r, rep.passed).with_file("mpr_curves.csv", format::csv(&["r", "probe", "image"], rows)))
}

pub fn hol_characterize(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let setup = hol_setup(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-10);
    let mut r = header("hol-characterize", cfg);
    r.text("family", setup.family.label())
        .text("operator", cfg.hol.operator.clone())
        .list("radii", setup.exh.radii());
    let cert_rows = |r: &mut Report, cert: &crate::holodisc::Certificate| {
        r.list("circle_radii", &cert.circle_radii);
        r.int("no_theorem_guarantee", cert.no_theorem_guarantee);
        for c in &cert.checks {
            r.flag(format!("check.{}", c.name.key()), c.passed)
                .float(format!("check.{}.residual", c.name.key()), c.residual);
        }
    };
    match characterize_isometry(&setup.op, &setup.exh, setup.family) {
        Ok(ch) => {
            r.text("alpha", format::complex(ch.scalar_alpha))
                .text("beta", format::complex(ch.scalar_beta));
            cert_rows(&mut r, &ch.certificate);
            let mut ok = true;
            if let Some((a, b)) = setup.truth {
                let err = (ch.scalar_alpha - a).norm() + (ch.scalar_beta - b).norm();
                ok = err < tol;
                r.float("tol", tol).float("parameter_error", err);
            }
            Ok(Outcome::new(r, ok))
        }
        Err(HoloError::NotCharacterizable {
            check,
            residual,
            certificate,
        }) => {
            r.text("failed_check", check.key()).float("failed_residual", residual);
            cert_rows(&mut r, &certificate);
            Ok(Outcome::new(r, false))
        }
        Err(e) => Err(CliError::Invalid(format!("hol: {e}"))),
    }
}

pub fn three_circle(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let h = &cfg.hol;
    let tol = cfg.tol.unwrap_or(RIGIDITY_TOL);
    let functions: Vec<TaylorFunction> = match &h.function_path {
        Some(p) => vec![format::parse_taylor(&read(p)?)?],
        None => {
            let mut rng = rng(cfg);
            (0..h.random_count)
                .map(|_| {
                    if rng.random_bool(h.monomial_fraction) {
                        let c = Complex64::from_polar(rng.random_range(0.1..3.0), rng.random_range(0.0..2.0 * PI));
                        TaylorFunction::monomial(c, rng.random_range(0..=h.random_degree))
                    } else {
                        random_polynomial(h.random_degree, &mut rng)
                    }
                })
                .collect()
        }
    };
    let mut r = header("three-circle", cfg);
    r.list("radii", &h.three_radii).float("tol", tol).int("functions", functions.len());
    let mut min_slack = f64::INFINITY;
    let (mut rigid, mut monomials, mut mismatches) = (0usize, 0usize, 0usize);
    for (i, f) in functions.iter().enumerate() {
        let q = samples_for_degree(f.degree_bound());
        let t = three_circle_check(f, h.three_radii, q, tol).map_err(|e| CliError::Invalid(format!("hol: {e}")))?;
        let mono = f.is_monomial(1e-12);
        min_slack = min_slack.min(t.slack);
        rigid += t.rigidity_flag as usize;
        monomials += mono as usize;
        mismatches += (t.rigidity_flag != mono) as usize;
        if functions.len() == 1 {
            r.float("lhs", t.lhs).float("rhs", t.rhs);
        } else if t.rigidity_flag != mono {
            r.int(format!("mismatch.{i}.degree"), f.degree()).float(format!("mismatch.{i}.slack"), t.slack);
        }
    }
    r.float("min_slack", min_slack)
        .int("rigid", rigid)
        .int("monomials", monomials)
        .int("mismatches", mismatches);
    Ok(Outcome::new(r, min_slack >= -1e-12 && mismatches == 0))
}

pub struct CuSetup {
    pub grid: Arc<Grid>,
    pub op: WeightedComposition,
    pub probes: Vec<GridFunction>,
    pub orientation: Option<Orientation>,
    /// Exact `φ` at each node.
    pub truth_phi: Vec<Complex64>,
}

pub fn cu_setup(cfg: &ExperimentConfig) -> Result<CuSetup, CliError> {
    let c = &cfg.cu;
    let bad = |field: &'static str| move |e: ContError| CliError::Invalid(format!("cu.{field}: {e}"));
    let mut rng = rng(cfg);
    let mut orientation = None;
    let (grid, map): (Arc<Grid>, Box<dyn PointMap>) = match c.domain.as_str() {
        "interval" => {
            let exh = Exhaustion1D::new(c.intervals.clone()).map_err(bad("intervals"))?;
            let grid = Grid::interval(&exh, c.nodes, &[]).map_err(bad("nodes"))?;
            let map: Box<dyn PointMap> = match c.map.as_str() {
                "identity" => Box::new(|z: Complex64| z),
                "homeo" => {
                    let o = Orientation::parse(&c.orientation)
                        .ok_or_else(|| CliError::Invalid(format!("cu.orientation: unknown `{}`", c.orientation)))?;
                    orientation = Some(o);
                    Box::new(build_interval_homeo(&exh, o, &c.controls).map_err(bad("controls"))?)
                }
                "zigzag" => Box::new(zigzag_fold(&exh)),
                "random" => {
                    let phi = random_interval_homeo(&exh, &mut rng);
                    orientation = Some(phi.orientation());
                    Box::new(phi)
                }
                other => return Err(CliError::Invalid(format!("cu.map: `{other}` is not an interval map"))),
            };
            (grid, map)
        }
        "disc" => {
            let exh = ExhaustionDisc::new(c.radii.clone()).map_err(bad("radii"))?;
            let grid = Grid::disc(&exh, c.disc_radii, c.disc_angles).map_err(bad("disc_radii"))?;
            let map: Box<dyn PointMap> = match c.map.as_str() {
                "identity" => Box::new(|z: Complex64| z),
                "twist" => {
                    let defs: Vec<AnnulusDeformation> = c
                        .twists
                        .iter()
                        .map(|t| AnnulusDeformation {
                            annulus: t.annulus,
                            twist: t.twist.clone(),
                            radial: t.radial.clone(),
                        })
                        .collect();
                    Box::new(build_annulus_homeo(&exh, &defs).map_err(bad("twists"))?)
                }
                "random" => Box::new(random_annulus_homeo(&exh, &mut rng)),
                other => return Err(CliError::Invalid(format!("cu.map: `{other}` is not a disc map"))),
            };
            (grid, map)
        }
        other => return Err(CliError::Invalid(format!("cu.domain: unknown `{other}`"))),
    };
    let h = match c.weight.as_str() {
        "one" => GridFunction::one(&grid),
        "random" => random_unimodular(&grid, &mut rng),
        w => match w.strip_prefix("scale:").and_then(|s| s.parse::<f64>().ok()) {
            Some(s) => GridFunction::constant(&grid, Complex64::new(s, 0.0)),
            None => return Err(CliError::Invalid(format!("cu.weight: unknown `{w}`"))),
        },
    };
    let truth_phi = grid.points().iter().map(|z| map.map(*z)).collect();
    let op = WeightedComposition::new(h, map.as_ref()).map_err(bad("map"))?;
    let probes = probe_functions(&grid, c.probes, &mut rng);
    Ok(CuSetup {
        grid,
        op,
        probes,
        orientation,
        truth_phi,
    })
}

fn cu_header(command: &str, cfg: &ExperimentConfig, s: &CuSetup) -> Report {
    let mut r = header(command, cfg);
    r.text("domain", cfg.cu.domain.clone())
        .text("map", cfg.cu.map.clone())
        .text("weight", cfg.cu.weight.clone())
        .int("nodes", s.grid.len())
        .float("cell_size", s.grid.cell_size())
        .int("probes", s.probes.len());
    if let Some(o) = s.orientation {
        r.text("orientation", o.label());
    }
    r
}

fn cu_err(e: ContError) -> CliError {
    CliError::Invalid(format!("cu: {e}"))
}

pub fn cu_iso_test(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cu_setup(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-12);
    let rep = isometry_test_grid(&s.op, &s.probes, tol).map_err(cu_err)?;
    let mut r = cu_header("cu-iso-test", cfg, &s);
    r.float("tol", tol)
        .list("level_gaps", &rep.level_gaps)
        .float("max_gap", rep.max_gap)
        .int("worst_level", rep.worst_level)
        .int("worst_probe", rep.worst_probe)
        .float("allowance", rep.allowance)
        .flag("isometry", rep.passed);
    let mut out = Outcome::new(r, rep.passed);
    if cfg.cu.export_functions {
        let image = s.op.apply(&s.probes[0]).map_err(cu_err)?;
        out = out
            .with_file("probe0.txt", format::write_grid_function(&s.probes[0]))
            .with_file("image0.txt", format::write_grid_function(&image));
    }
    Ok(out)
}

/// Every node on the interval; every eighth radius and angle on the disc.
fn field_rows(s: &CuSetup, phi: &[Complex64]) -> Vec<Vec<String>> {
    let keep = |k: usize| match s.grid.angles() {
        None => true,
        Some(m) => (k / m) % 8 == 0 && (k % m) % 8 == 0,
    };
    (0..s.grid.len())
        .filter(|k| keep(*k))
        .map(|k| {
            let (z, w, t) = (s.grid.points()[k], phi[k], s.truth_phi[k]);
            vec![num(z.re), num(z.im), num(w.re), num(w.im), num(t.re), num(t.im)]
        })
        .collect()
}

pub fn cu_recover(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cu_setup(cfg)?;
    let mut r = cu_header("cu-recover", cfg, &s);
    let checks = |r: &mut Report, cert: &crate::contspace::RecoveryCertificate| {
        for c in &cert.checks {
            r.flag(format!("check.{}", c.check.key()), c.passed)
                .float(format!("check.{}.residual", c.check.key()), c.residual);
            if !c.detail.is_empty() {
                r.text(format!("check.{}.detail", c.check.key()), c.detail.clone());
            }
        }
    };
    match recover_h_phi(&s.op, &s.grid, &s.probes) {
        Ok(rec) => {
            checks(&mut r, &rec.certificate);
            let h_error = rec
                .h
                .values()
                .iter()
                .zip(s.op.h().values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let cell = s.grid.cell_size();
            let phi_cells = rec
                .phi
                .iter()
                .zip(&s.truth_phi)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / cell;
            r.float("h_error", h_error).float("phi_error_cells", phi_cells);
            let mut ok = h_error <= 1e-12 && phi_cells <= 1.0;
            if let (Some(o), Domain::Interval(exh)) = (s.orientation, s.grid.domain()) {
                let mut worst = 0.0f64;
                for &(a, b) in exh.intervals() {
                    for (x, target) in [(a, if o == Orientation::Decreasing { b } else { a }), (b, if o == Orientation::Decreasing { a } else { b })] {
                        let k = s.grid.points().iter().position(|p| p.re == x).expect("bounds are nodes");
                        worst = worst.max((rec.phi[k].re - target).abs());
                    }
                }
                r.float("breakpoint_rule.max_error", worst);
                ok &= worst <= 1e-12;
            }
            r.flag("recovered", true);
            Ok(Outcome::new(r, ok).with_file(
                "deformation.csv",
                format::csv(&["x", "y", "phi_x", "phi_y", "true_phi_x", "true_phi_y"], field_rows(&s, &rec.phi)),
            ))
        }
        Err(ContError::NotWeightedComposition { check, detail, certificate }) => {
            checks(&mut r, &certificate);
            r.text("failed_check", check.key()).text("failure", detail).flag("recovered", false);
            Ok(Outcome::new(r, false))
        }
        Err(e) => Err(cu_err(e)),
    }
}

pub fn cu_decomp_bound(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let s = cu_setup(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-12);
    let rep = decomposition_bound_check(&s.op, &s.probes, tol).map_err(cu_err)?;
    let mut r = cu_header("cu-decomp-bound", cfg, &s);
    r.float("tol", tol)
        .float("unimodular_residual", rep.unimodular_residual)
        .float("worst_slack", rep.worst_slack)
        .float("dual_norm", rep.dual_norm)
        .float("linearity_residual", rep.linearity_residual)
        .float("adjacent_jump", rep.adjacent_jump)
        .int("nodes_checked", rep.nodes_checked)
        .flag("bound", rep.passed);
    Ok(Outcome::new(r, rep.passed))
}

pub fn emit_figure(which: Figure, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut r = header("emit-figure", cfg);
    match which {
        Figure::Fig1 => {
            let gauges = [
                ThetaGauge::clip(),
                ThetaGauge::exp(),
                ThetaGauge::rational(1.0).expect("positive exponent"),
            ];
            let rows: Vec<Vec<String>> = (0..=500)
                .map(|i| {
                    let t = i as f64 / 100.0;
                    std::iter::once(num(t)).chain(gauges.iter().map(|g| num(g.value(t)))).collect()
                })
                .collect();
            let clip_at_one = gauges[0].value(1.0);
            r.text("figure", "fig1").int("rows", rows.len()).float("theta_clip_at_1", clip_at_one);
            let ok = clip_at_one == 1.0;
            Ok(Outcome::new(r, ok).with_file(
                "fig1.csv",
                format::csv(&["t", "theta_clip", "theta_exp", "theta_rational1"], rows),
            ))
        }
        Figure::Fig2 => {
            let exh = Exhaustion1D::new(vec![(0.2, 0.8)]).expect("valid level");
            let inc = build_interval_homeo(&exh, Orientation::Increasing, &[(0.35, 0.27), (0.5, 0.5), (0.65, 0.74)])
                .map_err(cu_err)?;
            let dec = build_interval_homeo(&exh, Orientation::Decreasing, &[(0.5, 0.5)]).map_err(cu_err)?;
            let mut rows = Vec::new();
            for (label, phi) in [("increasing", &inc), ("decreasing", &dec)] {
                for (x, y) in phi.knots() {
                    rows.push(vec![label.to_string(), num(*x), num(*y)]);
                }
            }
            let fixed = [0.2, 0.5, 0.8].iter().all(|x| inc.eval(*x) == *x);
            let swapped = dec.eval(0.2) == 0.8 && dec.eval(0.8) == 0.2 && dec.eval(0.5) == 0.5;
            r.text("figure", "fig2")
                .flag("increasing_fixes_breakpoints", fixed)
                .flag("decreasing_swaps_bounds", swapped)
                .float("decreasing_at_half", dec.eval(0.5));
            Ok(Outcome::new(r, fixed && swapped).with_file("fig2.csv", format::csv(&["map", "x", "y"], rows)))
        }
        Figure::Fig3 => {
            let exh = ExhaustionDisc::standard();
            let phi = build_annulus_homeo(&exh, &[AnnulusDeformation::half_turn(&exh)]).map_err(cu_err)?;
            let mut rows = Vec::new();
            let mut deviation = 0.0f64;
            for i in 0..20 {
                let rad = i as f64 / 20.0;
                for j in 0..48 {
                    let theta = 2.0 * PI * j as f64 / 48.0;
                    let z = Complex64::from_polar(rad, theta);
                    let w = phi.map(z);
                    if exh.radii().contains(&rad) {
                        deviation = deviation.max((w.norm() - rad).abs());
                    }
                    rows.push(vec![num(rad), num(theta), num(z.re), num(z.im), num(w.re), num(w.im)]);
                }
            }
            r.text("figure", "fig3")
                .list("circles", exh.radii())
                .float("circle_deviation", deviation)
                .float("peak_twist", phi.twist_at(0.525));
            Ok(Outcome::new(r, deviation <= 1e-12).with_file(
                "fig3.csv",
                format::csv(&["r", "theta", "x", "y", "phi_x", "phi_y"], rows),
            ))
        }
    }
}
