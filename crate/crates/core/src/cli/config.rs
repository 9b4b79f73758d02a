//! `ExperimentConfig`: every input of a run, serialized as TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::measure::RecoverySpec;

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<String>,
    /// Seeds above `i64::MAX` do not fit a TOML integer.
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge: Option<String>,
    pub theta: ThetaSection,
    pub metric: MetricSection,
    pub measure: MeasureSection,
    pub hol: HolSection,
    pub cu: CuSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            subcommand: None,
            seed: 0,
            tol: None,
            gauge: None,
            theta: ThetaSection::default(),
            metric: MetricSection::default(),
            measure: MeasureSection::default(),
            hol: HolSection::default(),
            cu: CuSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaSection {
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
    pub rho: Vec<f64>,
    pub quad_tolerance: f64,
}

impl Default for ThetaSection {
    fn default() -> Self {
        Self {
            grid_lo: 1e-4,
            grid_hi: 1e4,
            grid_points: 200,
            rho: vec![1.5, 2.0, std::f64::consts::E, 10.0],
            quad_tolerance: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    pub weights: Vec<f64>,
    pub tail: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_path: Option<PathBuf>,
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_points: usize,
    /// Extra scales at which the curve gap is reported.
    pub probe_t: Vec<f64>,
}

impl Default for MetricSection {
    fn default() -> Self {
        Self {
            weights: vec![0.5, 0.5],
            tail: 0.0,
            a: vec![1.0, 2.0],
            b: vec![1.0, 3.0],
            weights_path: None,
            a_path: None,
            b_path: None,
            t_lo: 1e-3,
            t_hi: 1e3,
            t_points: 200,
            probe_t: vec![0.25],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureSection {
    pub log_atoms: Vec<f64>,
    pub masses: Vec<f64>,
    /// Two-column `(s, H_u(s))` data; replaces the forward simulation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_path: Option<PathBuf>,
    pub atom_budget: usize,
    pub spec: RecoverySpec,
}

impl Default for MeasureSection {
    fn default() -> Self {
        Self {
            log_atoms: vec![0.0, 1.5],
            masses: vec![0.6, 0.4],
            data_path: None,
            atom_budget: 4,
            spec: RecoverySpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolSection {
    /// `sup` or `hp:<p>`.
    pub family: String,
    /// Exhaustion radii `(n − 1)/n`.
    pub radius_indices: Vec<usize>,
    /// Truncation degree of operators and probes.
    pub degree: usize,
    pub probes: usize,
    /// `rotation`, `matrix` (read from `matrix_path`) or `scaled-identity`.
    pub operator: String,
    pub alpha_angle: f64,
    pub beta_angle: f64,
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_path: Option<PathBuf>,
    /// Coefficients `(re, im)` for three-circle; random polynomials otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function_path: Option<PathBuf>,
    pub three_radii: [f64; 3],
    pub random_count: usize,
    pub random_degree: usize,
    /// Fraction of random three-circle inputs drawn as monomials.
    pub monomial_fraction: f64,
}

impl Default for HolSection {
    fn default() -> Self {
        Self {
            family: "sup".into(),
            radius_indices: vec![2, 3, 4, 5],
            degree: 16,
            probes: 8,
            operator: "rotation".into(),
            alpha_angle: 0.7,
            beta_angle: -1.3,
            scale: 2.0,
            matrix_path: None,
            function_path: None,
            three_radii: [0.25, 0.5, 0.75],
            random_count: 50,
            random_degree: 8,
            monomial_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwistRecord {
    pub annulus: usize,
    pub twist: Vec<(f64, f64)>,
    pub radial: Vec<(f64, f64)>,
}

impl Default for TwistRecord {
    fn default() -> Self {
        Self {
            annulus: 0,
            twist: vec![(0.25, 0.0), (0.525, std::f64::consts::PI), (0.8, 0.0)],
            radial: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CuSection {
    /// `interval` or `disc`.
    pub domain: String,
    pub intervals: Vec<(f64, f64)>,
    pub radii: Vec<f64>,
    pub nodes: usize,
    pub disc_radii: usize,
    pub disc_angles: usize,
    /// `identity`, `homeo`, `zigzag`, `twist` or `random`.
    pub map: String,
    pub orientation: String,
    pub controls: Vec<(f64, f64)>,
    pub twists: Vec<TwistRecord>,
    /// `one`, `random` or `scale:<c>`.
    pub weight: String,
    pub probes: usize,
    /// Write probe 0 and its image as columnar grid functions.
    pub export_functions: bool,
}

impl Default for CuSection {
    fn default() -> Self {
        Self {
            domain: "interval".into(),
            intervals: vec![(0.2, 0.8), (0.1, 0.9), (0.05, 0.95), (0.025, 0.975)],
            radii: vec![0.25, 0.8],
            nodes: crate::contspace::INTERVAL_NODES,
            disc_radii: crate::contspace::DISC_RADII,
            disc_angles: crate::contspace::DISC_ANGLES,
            map: "homeo".into(),
            orientation: "decreasing".into(),
            controls: vec![(0.5, 0.5)],
            twists: vec![TwistRecord::default()],
            weight: "random".into(),
            probes: 8,
            export_functions: false,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks every tolerance and size field, naming the first bad one.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.seed > i64::MAX as u64 {
            return Err(CliError::Invalid(format!("seed must be at most {}", i64::MAX)));
        }
        if let Some(t) = self.tol {
            positive("tol", t)?;
        }
        let th = &self.theta;
        positive("theta.grid_lo", th.grid_lo)?;
        positive("theta.quad_tolerance", th.quad_tolerance)?;
        if !(th.grid_hi > th.grid_lo) {
            return Err(CliError::Invalid("theta.grid_hi must exceed theta.grid_lo".into()));
        }
        if th.grid_points < 2 {
            return Err(CliError::Invalid("theta.grid_points must be at least 2".into()));
        }
        let m = &self.metric;
        positive("metric.t_lo", m.t_lo)?;
        if !(m.t_hi > m.t_lo) {
            return Err(CliError::Invalid("metric.t_hi must exceed metric.t_lo".into()));
        }
        if m.t_points < 2 {
            return Err(CliError::Invalid("metric.t_points must be at least 2".into()));
        }
        for t in &m.probe_t {
            positive("metric.probe_t", *t)?;
        }
        self.measure
            .spec
            .validate()
            .map_err(|e| CliError::Invalid(format!("measure.spec: {e}")))?;
        if self.measure.atom_budget == 0 {
            return Err(CliError::Invalid("measure.atom_budget must be positive".into()));
        }
        let h = &self.hol;
        if h.radius_indices.is_empty() {
            return Err(CliError::Invalid("hol.radius_indices is empty".into()));
        }
        if h.probes == 0 {
            return Err(CliError::Invalid("hol.probes must be positive".into()));
        }
        if !(0.0..=1.0).contains(&h.monomial_fraction) {
            return Err(CliError::Invalid("hol.monomial_fraction must lie in [0, 1]".into()));
        }
        let c = &self.cu;
        if c.probes == 0 {
            return Err(CliError::Invalid("cu.probes must be positive".into()));
        }
        if c.nodes < 2 || c.disc_radii < 2 || c.disc_angles < 3 {
            return Err(CliError::Invalid("cu.nodes, cu.disc_radii or cu.disc_angles too small".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_round_trips() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn unknown_field_rejected() {
        let err = ExperimentConfig::from_toml("sede = 3\n").unwrap_err();
        assert!(err.to_string().contains("sede"));
    }

    #[test]
    fn bad_tolerance_names_field() {
        let cfg = ExperimentConfig {
            tol: Some(-1.0),
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().unwrap_err().to_string().contains("tol"));
        let mut cfg = ExperimentConfig::default();
        cfg.theta.quad_tolerance = 0.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("theta.quad_tolerance"));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(seed in 0u64..(i64::MAX as u64), tol in 1e-300f64..1e3, a in proptest::collection::vec(1e-9f64..1e9, 1..6), angle in -10.0f64..10.0) {
            let mut cfg = ExperimentConfig { seed, tol: Some(tol), gauge: Some("rational:2".into()), ..ExperimentConfig::default() };
            cfg.metric.a = a.clone();
            cfg.metric.b = a;
            cfg.hol.alpha_angle = angle;
            cfg.cu.controls = vec![(0.3, angle.abs() / 11.0)];
            let text = cfg.to_toml();
            let back = ExperimentConfig::from_toml(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            for (x, y) in back.metric.a.iter().zip(&cfg.metric.a) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
