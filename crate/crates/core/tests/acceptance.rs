//! Acceptance criteria. Each prints one `PASS`/`FAIL` line; the process
//! exits nonzero if any fails.

use std::f64::consts::{E, PI};
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isolab::contspace::probes::{probe_functions, random_annulus_homeo, random_interval_homeo, random_unimodular};
use isolab::contspace::{
    decomposition_bound_check, isometry_test_grid, recover_h_phi, zigzag_fold, ContError, Exhaustion1D,
    ExhaustionDisc, Grid, Orientation, PointMap, RecoveryCheck, WeightedComposition,
};
use isolab::holodisc::{
    characterize_isometry, hp_seminorm, random_polynomial, rotation_matrix, samples_for_degree,
    strict_monotonicity_check, three_circle_check, DiscExhaustion, DiscOperator, Family, HoloError, TaylorFunction,
    CheckName,
};
use isolab::measure::{roundtrip_check, sample_moment_data, LogMeasure, RecoverySpec};
use isolab::metric::{
    count_support_start, measures_from_vectors, separate, sufficient_large_t, SeminormVector, SeparationResult,
    WeightSequence,
};
use isolab::quadrature::QuadratureSpec;
use isolab::theta::{check_admissibility, frullani_integral, log_grid, pair_grid, Hypothesis, ThetaGauge};

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn gauge_admissibility() -> Verdict {
    let quad = QuadratureSpec::default();
    let grid = log_grid(1e-4, 1e4, 200);
    let pairs = pair_grid(&grid);
    let start = Instant::now();
    for g in ThetaGauge::builtins() {
        let rep = check_admissibility(&g, &grid, &pairs, &quad);
        ensure(rep.passed, format!("{} failed admissibility", g.name()))?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 1.0, format!("took {elapsed:.3} s"))?;
    let sq = ThetaGauge::clipped_power(2.0).map_err(|e| e.to_string())?;
    let rep = check_admissibility(&sq, &grid, &pairs, &quad);
    let sub = rep.check(Hypothesis::Subadditive).ok_or("no subadditivity check")?;
    ensure(!sub.passed && !rep.passed, "clipped square passed subadditivity")?;
    Ok(format!("3 builtins admissible in {elapsed:.3} s; clipped square violates subadditivity by {:.3}", sub.worst_violation))
}

fn frullani_identity() -> Verdict {
    let quad = QuadratureSpec::default();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for g in ThetaGauge::builtins() {
        for rho in [1.5, 2.0, E, 10.0] {
            let v = frullani_integral(&g, rho, &quad).map_err(|e| e.to_string())?.value;
            let err = (v - rho.ln()).abs();
            ensure(err < 1e-6, format!("{} at rho={rho}: error {err:e}", g.name()))?;
            worst = worst.max(err);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 5.0, format!("took {elapsed:.3} s"))?;
    Ok(format!("worst error {worst:.2e} in {elapsed:.3} s"))
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> WeightSequence {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    WeightSequence::normalized(&raw).expect("positive weights")
}

fn sorted_entries(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn separation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = log_grid(1e-3, 1e3, 200);
    let start = Instant::now();
    let mut distinct = 0;
    let mut min_gap = f64::INFINITY;
    while distinct < 500 {
        let n = rng.random_range(1..=8);
        let r = random_weights(&mut rng, n);
        let a = SeminormVector::new(sorted_entries(&mut rng, n)).expect("finite");
        let b = SeminormVector::new(sorted_entries(&mut rng, n)).expect("finite");
        let (ma, mb) = (measures_from_vectors(&r, &a).expect("positive"), measures_from_vectors(&r, &b).expect("positive"));
        if ma.approx_eq(&mb, 1e-12) {
            continue;
        }
        distinct += 1;
        for g in ThetaGauge::builtins() {
            match separate(&g, &r, &a, &b, &grid).map_err(|e| e.to_string())? {
                SeparationResult::Separated { gap, .. } if gap > 1e-12 => min_gap = min_gap.min(gap),
                other => return Err(format!("{} on {:?} vs {:?}: {other:?}", g.name(), a.values(), b.values())),
            }
        }
    }
    // Same measure from different vectors: swap entries carrying equal weights.
    let mut equal = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let mut raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        raw[1] = raw[0];
        let r = WeightSequence::normalized(&raw).expect("positive weights");
        let av = sorted_entries(&mut rng, n);
        let mut bv = av.clone();
        bv.swap(0, 1);
        let a = SeminormVector::new(av).expect("finite");
        let b = SeminormVector::new(bv).expect("finite");
        for g in ThetaGauge::builtins() {
            let res = separate(&g, &r, &a, &b, &grid).map_err(|e| e.to_string())?;
            ensure(
                matches!(res, SeparationResult::NotSeparated { .. }),
                format!("{} on equal measures: {res:?}", g.name()),
            )?;
        }
        equal += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 30.0, format!("took {elapsed:.2} s"))?;
    Ok(format!(
        "{distinct} distinct pairs separated by every builtin (min gap {min_gap:.2e}); {equal} equal pairs not separated; {elapsed:.2} s"
    ))
}

fn weight_counting() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..100 {
        let n = rng.random_range(1..=10);
        let zeros = rng.random_range(0..=n);
        let r = random_weights(&mut rng, n);
        let mut v = vec![0.0; zeros];
        v.extend(sorted_entries(&mut rng, n - zeros));
        let a = SeminormVector::new(v).expect("finite");
        for g in ThetaGauge::builtins() {
            let t = sufficient_large_t(&g, &r, &a);
            let got = count_support_start(&g, &r, &a, t).map_err(|e| e.to_string())?;
            ensure(
                got.index == zeros,
                format!("case {case} {}: expected {zeros}, got {}", g.name(), got.index),
            )?;
        }
    }
    Ok("100 vectors, support start exact for every builtin".into())
}

fn measure_roundtrip() -> Verdict {
    let spec = RecoverySpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gauges = [ThetaGauge::rational(2.0).expect("positive"), ThetaGauge::exp()];
    let (mut worst_atom, mut worst_mass, mut worst_zero) = (0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    for _ in 0..10 {
        let y = rng.random_range(-3.0..3.0);
        let m = rng.random_range(0.2..1.0);
        let single = LogMeasure::new(vec![y], vec![m]).expect("valid");
        let y1 = rng.random_range(-3.0..1.0);
        let y2 = y1 + rng.random_range(1.0..3.0);
        let two = LogMeasure::new(vec![y1, y2], vec![rng.random_range(0.1..0.5), rng.random_range(0.1..0.5)])
            .expect("valid");
        for g in &gauges {
            for nu in [&single, &two] {
                let rt = roundtrip_check(g, nu, &spec, 4)
                    .map_err(|e| format!("{} on {:?}: {e}", g.name(), nu.log_atoms()))?;
                worst_atom = worst_atom.max(rt.max_atom_error);
                worst_mass = worst_mass.max(rt.max_mass_error);
                let data = sample_moment_data(g, nu, spec.u, &spec).map_err(|e| e.to_string())?;
                let zero = (data.transform(0.0) - nu.total_mass() * spec.u).norm();
                worst_zero = worst_zero.max(zero);
                cases += 1;
            }
        }
    }
    ensure(worst_atom < 1e-3, format!("atom error {worst_atom:e}"))?;
    ensure(worst_mass < 1e-3, format!("mass error {worst_mass:e}"))?;
    ensure(worst_zero < 1e-6, format!("zero-frequency error {worst_zero:e}"))?;
    Ok(format!(
        "{cases} round trips: atom error {worst_atom:.1e}, mass error {worst_mass:.1e}, zero frequency {worst_zero:.1e}"
    ))
}

fn parseval() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(0..=32);
        let f = random_polynomial(d, &mut rng);
        for r in [0.5, 2.0 / 3.0, 0.75] {
            let mut exact = 0.0;
            let mut rk = 1.0;
            for c in f.coeffs() {
                exact += c.norm_sqr() * rk;
                rk *= r * r;
            }
            let exact = exact.sqrt();
            let got = hp_seminorm(&f, 2.0, r, samples_for_degree(d));
            worst = worst.max((got - exact).abs());
        }
    }
    ensure(worst < 1e-12, format!("worst error {worst:e}"))?;
    Ok(format!("100 polynomials, worst error {worst:.1e}"))
}

fn monotonicity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grids: [&[f64]; 2] = [&[0.1, 0.3, 0.5, 0.7, 0.9], &[0.5, 2.0 / 3.0, 0.75, 0.8, 5.0 / 6.0]];
    for case in 0..100 {
        let d = rng.random_range(1..=12);
        let mut f = random_polynomial(d, &mut rng);
        if f.is_constant() {
            f = f.add(&TaylorFunction::identity());
        }
        for p in [1.0, 2.0, 3.0] {
            for grid in grids {
                let rep = strict_monotonicity_check(&f, p, grid, 64).map_err(|e| e.to_string())?;
                ensure(rep.passed && rep.min_gap > 0.0, format!("case {case} p={p}: min gap {:e}", rep.min_gap))?;
            }
        }
    }
    for c in [Complex64::new(1.0, 0.0), Complex64::new(-0.3, 2.0)] {
        for p in [1.0, 2.0, 3.0] {
            let rep = strict_monotonicity_check(&TaylorFunction::constant(c), p, grids[0], 64)
                .map_err(|e| e.to_string())?;
            let flat = rep.values.iter().all(|v| (v - c.norm()).abs() <= 1e-15 * c.norm());
            ensure(rep.passed && flat, format!("constant {c} not flat at p={p}"))?;
        }
    }
    Ok("100 polynomials strictly increasing for p in {1,2,3}; constants flat".into())
}

fn characterization() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let degree = 16;
    let full = DiscExhaustion::from_indices(&[2, 3, 4, 5], degree).map_err(|e| e.to_string())?;
    let short = DiscExhaustion::from_indices(&[2, 3], degree).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = Complex64::from_polar(1.0, rng.random_range(-PI..PI));
        let b = Complex64::from_polar(1.0, rng.random_range(-PI..PI));
        let t = DiscOperator::matrix(rotation_matrix(a, b, degree)).map_err(|e| e.to_string())?;
        for fam in [Family::Sup, Family::Hp(1.0), Family::Hp(3.0)] {
            let c = characterize_isometry(&t, &full, fam).map_err(|e| format!("{}: {e}", fam.label()))?;
            let err = (c.scalar_alpha - a).norm() + (c.scalar_beta - b).norm();
            ensure(err < 1e-10, format!("{}: parameter error {err:e}", fam.label()))?;
            worst = worst.max(err);
            if fam == Family::Sup {
                let s = characterize_isometry(&t, &short, fam).map_err(|e| format!("indices {{2,3}}: {e}"))?;
                ensure(
                    s.scalar_alpha == c.scalar_alpha && s.scalar_beta == c.scalar_beta,
                    "restricted exhaustion changed the parameters",
                )?;
            }
        }
    }
    let two = DiscOperator::matrix(DMatrix::identity(degree + 1, degree + 1) * Complex64::new(2.0, 0.0))
        .map_err(|e| e.to_string())?;
    match characterize_isometry(&two, &full, Family::Sup) {
        Err(HoloError::NotCharacterizable { check: CheckName::Unimodularity, .. }) => {}
        other => return Err(format!("2I: {other:?}")),
    }
    Ok(format!("100 rotations x 3 families, worst error {worst:.1e}; {{2,3}} identical; 2I rejected at unimodularity"))
}

fn three_circle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let radii = [0.25, 0.5, 0.75];
    let (mut min_slack, mut monomials) = (f64::INFINITY, 0);
    for case in 0..1000 {
        let f = if rng.random_bool(0.2) {
            let c = Complex64::from_polar(rng.random_range(0.1..3.0), rng.random_range(-PI..PI));
            TaylorFunction::monomial(c, rng.random_range(0..=10))
        } else {
            random_polynomial(rng.random_range(1..=10), &mut rng)
        };
        let t = three_circle_check(&f, radii, samples_for_degree(f.degree_bound()), 1e-10).map_err(|e| e.to_string())?;
        let mono = f.is_monomial(0.0);
        ensure(t.slack >= -1e-12, format!("case {case}: slack {:e}", t.slack))?;
        ensure(t.rigidity_flag == mono, format!("case {case}: flag {} but monomial {mono}", t.rigidity_flag))?;
        min_slack = min_slack.min(t.slack);
        monomials += mono as usize;
    }
    Ok(format!("1000 functions ({monomials} monomials), min slack {min_slack:.1e}, flag matches monomials"))
}

fn banach_stone() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let exh = Exhaustion1D::standard();
    let grid = Grid::interval_default(&exh);
    let (mut h_err, mut phi_cells, mut rule_err, mut decreasing) = (0.0f64, 0.0f64, 0.0f64, 0);
    for case in 0..50 {
        let phi = random_interval_homeo(&exh, &mut rng);
        let h = random_unimodular(&grid, &mut rng);
        let op = WeightedComposition::new(h.clone(), &phi).map_err(|e| e.to_string())?;
        let probes = probe_functions(&grid, 4, &mut rng);
        let rec = recover_h_phi(&op, &grid, &probes).map_err(|e| format!("interval case {case}: {e}"))?;
        for (k, z) in grid.points().iter().enumerate() {
            h_err = h_err.max((rec.h.values()[k] - h.values()[k]).norm());
            phi_cells = phi_cells.max((rec.phi[k] - phi.map(*z)).norm() / grid.cell_size());
        }
        if phi.orientation() == Orientation::Decreasing {
            decreasing += 1;
            for &(a, b) in exh.intervals() {
                for (x, want) in [(a, b), (b, a)] {
                    let k = grid.points().iter().position(|p| p.re == x).ok_or("bound is not a node")?;
                    rule_err = rule_err.max((rec.phi[k].re - want).abs());
                }
            }
        }
    }
    ensure(h_err <= 1e-12, format!("interval h error {h_err:e}"))?;
    ensure(phi_cells <= 1.0, format!("interval phi error {phi_cells} cells"))?;
    ensure(decreasing > 0 && rule_err <= 1e-12, format!("breakpoint rule error {rule_err:e} over {decreasing} maps"))?;

    let dexh = ExhaustionDisc::standard();
    let dgrid = Grid::disc_default(&dexh);
    let (mut dh_err, mut dphi_cells, mut circle_dev) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..50 {
        let phi = random_annulus_homeo(&dexh, &mut rng);
        for &r in dexh.radii() {
            for j in 0..720 {
                let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / 720.0);
                circle_dev = circle_dev.max((phi.map(z).norm() - r).abs());
            }
        }
        let h = random_unimodular(&dgrid, &mut rng);
        let op = WeightedComposition::new(h.clone(), &phi).map_err(|e| e.to_string())?;
        let probes = probe_functions(&dgrid, 4, &mut rng);
        let rec = recover_h_phi(&op, &dgrid, &probes).map_err(|e| format!("disc case {case}: {e}"))?;
        for (k, z) in dgrid.points().iter().enumerate() {
            dh_err = dh_err.max((rec.h.values()[k] - h.values()[k]).norm());
            dphi_cells = dphi_cells.max((rec.phi[k] - phi.map(*z)).norm() / dgrid.cell_size());
        }
    }
    ensure(dh_err <= 1e-12, format!("disc h error {dh_err:e}"))?;
    ensure(dphi_cells <= 1.0, format!("disc phi error {dphi_cells} cells"))?;
    ensure(circle_dev <= 1e-12, format!("circle deviation {circle_dev:e}"))?;
    Ok(format!(
        "interval: h {h_err:.1e}, phi {phi_cells:.1e} cells, rule {rule_err:.1e} ({decreasing} decreasing); \
         disc: h {dh_err:.1e}, phi {dphi_cells:.1e} cells, circles {circle_dev:.1e}"
    ))
}

fn nonsurjective() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let exh = Exhaustion1D::standard();
    let grid = Grid::interval_default(&exh);
    let h = random_unimodular(&grid, &mut rng);
    let op = WeightedComposition::new(h, &zigzag_fold(&exh)).map_err(|e| e.to_string())?;
    let probes = probe_functions(&grid, 20, &mut rng);
    let iso = isometry_test_grid(&op, &probes, 1e-12).map_err(|e| e.to_string())?;
    ensure(iso.passed, format!("isometry gap {:e}", iso.max_gap))?;
    match recover_h_phi(&op, &grid, &probes) {
        Err(ContError::NotWeightedComposition { check: RecoveryCheck::Injectivity, .. }) => {}
        Err(e) => return Err(format!("recovery failed elsewhere: {e}")),
        Ok(_) => return Err("zigzag recovered as a homeomorphism".into()),
    }
    let bound = decomposition_bound_check(&op, &probes, 1e-12).map_err(|e| e.to_string())?;
    ensure(bound.passed, format!("bound slack {:e}", bound.worst_slack))?;
    Ok(format!(
        "isometry gap {:.1e}; injectivity rejected; bound slack {:.1e} over {} nodes",
        iso.max_gap, bound.worst_slack, bound.nodes_checked
    ))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 20261014\n[cu]\nmap = \"random\"\nweight = \"random\"\n[hol]\nrandom_count = 40\n")
        .map_err(|e| e.to_string())?;
    let commands = ["cu-recover", "three-circle", "hol-iso-test", "recover-measure", "separate"];
    for cmd in commands {
        let mut reports = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{cmd}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_isolab"))
                .arg(cmd)
                .arg("--config")
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.code().is_some_and(|c| c <= 1), format!("{cmd} exited {:?}", status.status))?;
            let report = std::fs::read(out.join("report.txt")).map_err(|e| e.to_string())?;
            ensure(report == status.stdout, format!("{cmd}: stdout differs from report.txt"))?;
            reports.push(report);
        }
        ensure(reports[0] == reports[1], format!("{cmd}: reports differ between runs"))?;
    }
    Ok(format!("{} subcommands byte-identical across two runs", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("gauge admissibility", gauge_admissibility),
        ("frullani identity", frullani_identity),
        ("separation", separation),
        ("weight counting", weight_counting),
        ("measure round trip", measure_roundtrip),
        ("parseval oracle", parseval),
        ("seminorm monotonicity", monotonicity),
        ("isometry characterization", characterization),
        ("three circle", three_circle),
        ("weighted composition round trip", banach_stone),
        ("nonsurjective fold", nonsurjective),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
