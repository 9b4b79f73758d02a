//! Batch experiment runner: one subcommand per module, flat key-value
//! reports on stdout and in `--out`, CSV curve data alongside.

pub mod commands;
pub mod config;
pub mod format;
pub mod selftest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::ExperimentConfig;
pub use format::Report;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// Result of one run: the report, named output files, and the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<(String, String)>,
    pub passed: bool,
}

impl Outcome {
    pub fn new(mut report: Report, passed: bool) -> Self {
        report.flag("status", passed);
        Self {
            report,
            files: Vec::new(),
            passed,
        }
    }

    pub fn with_file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.to_string(), contents));
        self
    }
}

#[derive(Debug, Parser)]
#[command(name = "isolab", version, about = "Numerical experiments on Fréchet-space isometries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML experiment config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comparison tolerance of the command.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Directory for report.txt, config.toml and CSV data.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run the built-in examples of the command's module instead.
    #[arg(long)]
    pub selftest: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GaugeArg {
    /// `clip`, `exp`, `rational:<α>` or `clipped_power:<p>`.
    #[arg(long)]
    pub gauge: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct HolArgs {
    /// `sup` or `hp:<p>`.
    #[arg(long)]
    pub family: Option<String>,
    /// `rotation`, `rotation-matrix`, `matrix` or `scaled-identity`.
    #[arg(long)]
    pub operator: Option<String>,
    /// Matrix file (`rows cols` header, then `row col re im`).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CuArgs {
    /// `interval` or `disc`.
    #[arg(long)]
    pub domain: Option<String>,
    /// `identity`, `homeo`, `zigzag`, `twist` or `random`.
    #[arg(long)]
    pub map: Option<String>,
    /// `one`, `random` or `scale:<c>`.
    #[arg(long)]
    pub weight: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// θ for clip, exp and rational(1) on `[0, 5]`.
    Fig1,
    /// Knots of an increasing and a decreasing interval homeomorphism.
    Fig2,
    /// Polar sample of the half-turn annulus twist.
    Fig3,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sampled admissibility certificate of a gauge.
    ThetaCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gauge: GaugeArg,
    },
    /// `∫ (θ(ρt) − θ(t)) dt/t` against `ln ρ`.
    Frullani {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gauge: GaugeArg,
        /// Comma-separated ratios.
        #[arg(long)]
        rho: Option<String>,
    },
    /// Moment-curve separation of two seminorm vectors.
    Separate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gauge: GaugeArg,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        weights: Option<String>,
    },
    /// Atomic measure from moment data.
    RecoverMeasure {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gauge: GaugeArg,
        /// Two-column `(s, H_u(s))` file.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Seminorm-gap test of a disc operator on random probes.
    HolIsoTest {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        hol: HolArgs,
    },
    /// Recover `(α, β)` of a rotation from its action alone.
    HolCharacterize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        hol: HolArgs,
    },
    /// Three-circle slack and rigidity.
    ThreeCircle {
        #[command(flatten)]
        common: Common,
        /// Coefficient file, one `re im` pair per line.
        #[arg(long)]
        function: Option<PathBuf>,
    },
    /// Grid isometry test of a weighted composition on `C(U)`.
    CuIsoTest {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cu: CuArgs,
    },
    /// Recover `(h, φ)` from a grid operator.
    CuRecover {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cu: CuArgs,
    },
    /// Pointwise bound on the functionals `Φ(z)`.
    CuDecompBound {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        cu: CuArgs,
    },
    /// CSV plot data for `fig1`, `fig2` or `fig3`.
    EmitFigure {
        #[command(flatten)]
        common: Common,
        which: Figure,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ThetaCheck { .. } => "theta-check",
            Command::Frullani { .. } => "frullani",
            Command::Separate { .. } => "separate",
            Command::RecoverMeasure { .. } => "recover-measure",
            Command::HolIsoTest { .. } => "hol-iso-test",
            Command::HolCharacterize { .. } => "hol-characterize",
            Command::ThreeCircle { .. } => "three-circle",
            Command::CuIsoTest { .. } => "cu-iso-test",
            Command::CuRecover { .. } => "cu-recover",
            Command::CuDecompBound { .. } => "cu-decomp-bound",
            Command::EmitFigure { .. } => "emit-figure",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::ThetaCheck { common, .. }
            | Command::Frullani { common, .. }
            | Command::Separate { common, .. }
            | Command::RecoverMeasure { common, .. }
            | Command::HolIsoTest { common, .. }
            | Command::HolCharacterize { common, .. }
            | Command::ThreeCircle { common, .. }
            | Command::CuIsoTest { common, .. }
            | Command::CuRecover { common, .. }
            | Command::CuDecompBound { common, .. }
            | Command::EmitFigure { common, .. } => common,
        }
    }
}

fn apply_overrides(cmd: &Command, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
    let common = cmd.common();
    cfg.subcommand = Some(cmd.name().to_string());
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.tol {
        cfg.tol = Some(t);
    }
    let set_gauge = |cfg: &mut ExperimentConfig, g: &GaugeArg| {
        if let Some(name) = &g.gauge {
            cfg.gauge = Some(name.clone());
        }
    };
    let set_hol = |cfg: &mut ExperimentConfig, h: &HolArgs| {
        if let Some(f) = &h.family {
            cfg.hol.family = f.clone();
        }
        if let Some(o) = &h.operator {
            cfg.hol.operator = o.clone();
        }
        if let Some(m) = &h.matrix {
            cfg.hol.matrix_path = Some(m.clone());
            if h.operator.is_none() {
                cfg.hol.operator = "matrix".into();
            }
        }
    };
    let set_cu = |cfg: &mut ExperimentConfig, c: &CuArgs| {
        if let Some(d) = &c.domain {
            cfg.cu.domain = d.clone();
            if c.map.is_none() && d == "disc" && cfg.cu.map == "homeo" {
                cfg.cu.map = "twist".into();
            }
        }
        if let Some(m) = &c.map {
            cfg.cu.map = m.clone();
        }
        if let Some(w) = &c.weight {
            cfg.cu.weight = w.clone();
        }
    };
    match cmd {
        Command::ThetaCheck { gauge, .. } | Command::RecoverMeasure { gauge, .. } => {
            set_gauge(cfg, gauge);
            if let Command::RecoverMeasure { data: Some(d), .. } = cmd {
                cfg.measure.data_path = Some(d.clone());
            }
        }
        Command::Frullani { gauge, rho, .. } => {
            set_gauge(cfg, gauge);
            if let Some(r) = rho {
                cfg.theta.rho = format::parse_inline(r, "--rho")?;
            }
        }
        Command::Separate { gauge, a, b, weights, .. } => {
            set_gauge(cfg, gauge);
            if let Some(a) = a {
                cfg.metric.a = format::parse_inline(a, "--a")?;
            }
            if let Some(b) = b {
                cfg.metric.b = format::parse_inline(b, "--b")?;
            }
            if let Some(w) = weights {
                cfg.metric.weights = format::parse_inline(w, "--weights")?;
            }
        }
        Command::HolIsoTest { hol, .. } | Command::HolCharacterize { hol, .. } => set_hol(cfg, hol),
        Command::ThreeCircle { function, .. } => {
            if let Some(f) = function {
                cfg.hol.function_path = Some(f.clone());
            }
        }
        Command::CuIsoTest { cu, .. } | Command::CuRecover { cu, .. } | Command::CuDecompBound { cu, .. } => {
            set_cu(cfg, cu)
        }
        Command::EmitFigure { .. } => {}
    }
    Ok(())
}

/// Runs `name` on a validated config.
pub fn execute(name: &str, cfg: &ExperimentConfig, figure: Option<Figure>) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match name {
        "theta-check" => commands::theta_check(cfg),
        "frullani" => commands::frullani(cfg),
        "separate" => commands::separate(cfg),
        "recover-measure" => commands::recover_measure(cfg),
        "hol-iso-test" => commands::hol_iso_test(cfg),
        "hol-characterize" => commands::hol_characterize(cfg),
        "three-circle" => commands::three_circle(cfg),
        "cu-iso-test" => commands::cu_iso_test(cfg),
        "cu-recover" => commands::cu_recover(cfg),
        "cu-decomp-bound" => commands::cu_decomp_bound(cfg),
        "emit-figure" => commands::emit_figure(figure.unwrap_or(Figure::Fig1), cfg),
        other => Err(CliError::Invalid(format!("unknown subcommand `{other}`"))),
    }
}

fn write_outputs(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("report.txt"), outcome.report.render()).map_err(io)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml()).map_err(io)?;
    for (name, contents) in &outcome.files {
        std::fs::write(dir.join(name), contents).map_err(io)?;
    }
    Ok(())
}

fn run_parsed(cli: Cli) -> Result<Outcome, CliError> {
    let cmd = &cli.command;
    let common = cmd.common();
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    apply_overrides(cmd, &mut cfg)?;
    cfg.validate()?;
    let outcome = if common.selftest {
        selftest::run(cmd.name())
    } else {
        let figure = match cmd {
            Command::EmitFigure { which, .. } => Some(*which),
            _ => None,
        };
        execute(cmd.name(), &cfg, figure)?
    };
    let out = common.out.clone().or_else(|| {
        matches!(cmd, Command::EmitFigure { .. }).then(|| PathBuf::from("figures"))
    });
    if let Some(dir) = out {
        write_outputs(&dir, &cfg, &outcome)?;
    }
    Ok(outcome)
}

/// Parses arguments, runs, prints the report and returns the exit code:
/// 0 pass, 1 finding or failure, 2 invalid input.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_parsed(cli) {
        Ok(outcome) => {
            print!("{}", outcome.report.render());
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
