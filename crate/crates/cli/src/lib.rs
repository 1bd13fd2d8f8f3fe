//! Argument parsing and table output for the `loem` binary.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use loem_core::estimation::{
    check_identifiable, heisenberg_sweep, qcrb_per_shot, run_trials, run_trials_with_error_bars, NoiseModel,
    TrialConfig,
};
use loem_core::information::{family_qfim, uhlmann_curvature, wcc_holds};
use loem_core::loem::{outcome_probabilities, AntiparallelFamily, ProductFamily, QubitRotation};
use loem_core::state::{derivatives, ParameterPoint, StateFamily, StateVector};
use serde::{Deserialize, Serialize};

pub const FIG4_THETAS_DEG: [f64; 6] = [10.0, 25.0, 40.0, 55.0, 70.0, 85.0];
pub const FIG4_PHI_DEG: f64 = 36.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Help or version text; not a failure.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numerical(#[from] loem_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// `|n, −n⟩`
    Antiparallel,
    /// `|n⟩`
    Single,
    /// `|n, n⟩`
    Identical,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Antiparallel => "antiparallel",
            Family::Single => "single",
            Family::Identical => "identical",
        }
    }

    fn build(self, n_iter: u32) -> Result<Box<dyn StateFamily>, CliError> {
        let rotation = QubitRotation { n_iter };
        Ok(match self {
            Family::Antiparallel => Box::new(AntiparallelFamily::new(n_iter)),
            Family::Single => Box::new(ProductFamily::identical_copies(rotation, StateVector::basis(2, 0), 1)?),
            Family::Identical => Box::new(ProductFamily::identical_copies(rotation, StateVector::basis(2, 0), 2)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Noise {
    Multinomial,
    Poisson,
}

impl From<Noise> for NoiseModel {
    fn from(n: Noise) -> Self {
        match n {
            Noise::Multinomial => NoiseModel::Multinomial,
            Noise::Poisson => NoiseModel::Poisson,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "loem", version, about = "Two-parameter qubit estimation with orthogonal probe pairs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Output format; single results default to text, tables to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta_deg: f64,
    #[arg(long, allow_negative_numbers = true)]
    phi_deg: f64,
    #[arg(long, default_value_t = 1)]
    n: u32,
}

#[derive(Debug, Args)]
struct CampaignArgs {
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 400)]
    repeats: usize,
    #[arg(long, env = "LOEM_SEED", default_value_t = 7)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Four-port outcome probabilities.
    Probs(PointArgs),
    /// Quantum Fisher information matrix.
    Qfim {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value_t = Family::Antiparallel)]
        family: Family,
    },
    /// Mean Uhlmann curvature and the weak commutativity check.
    Wcc {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value_t = Family::Antiparallel)]
        family: Family,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Probability surfaces over `[0, 360)²` degrees.
    Surface {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
    },
    /// Monte Carlo MSE campaigns, one row per θ.
    Simulate {
        /// Comma-separated list; defaults to the 10°..85° sweep at φ = 36°.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        theta_deg: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        phi_deg: Option<f64>,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Poisson resamples for error bars; 0 skips them.
        #[arg(long, default_value_t = 100)]
        resamples: usize,
        #[arg(long, value_enum, default_value_t = Noise::Multinomial)]
        noise: Noise,
    },
    /// M×MSE against the iteration count N = 1..n-max.
    Heisenberg {
        #[arg(long, allow_negative_numbers = true)]
        theta_deg: f64,
        #[arg(long, allow_negative_numbers = true)]
        phi_deg: f64,
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        #[command(flatten)]
        campaign: CampaignArgs,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Probs { theta: f64, phi: f64, n_iter: u32 },
    Qfim { theta: f64, phi: f64, n_iter: u32, family: Family },
    Wcc { theta: f64, phi: f64, n_iter: u32, family: Family, tol: f64 },
    Surface { n_iter: u32, resolution: usize },
    Simulate { trials: Vec<TrialConfig>, resamples: usize },
    Heisenberg { theta: f64, phi: f64, n_max: u32, shots: u64, repeats: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub format: Format,
    pub output: Option<PathBuf>,
}

fn require_n(n: u32) -> Result<u32, CliError> {
    if n == 0 {
        Err(CliError::Usage("--n must be at least 1".into()))
    } else {
        Ok(n)
    }
}

fn constraint(e: loem_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Parses `argv` (including the program name) into a validated config.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let single = cli.format.unwrap_or(Format::Text);
    let table = match cli.format {
        None | Some(Format::Text) => Format::Csv,
        Some(f) => f,
    };
    let (command, format) = match cli.command {
        Cmd::Probs(p) => (
            Command::Probs { theta: p.theta_deg.to_radians(), phi: p.phi_deg.to_radians(), n_iter: require_n(p.n)? },
            single,
        ),
        Cmd::Qfim { point: p, family } => (
            Command::Qfim {
                theta: p.theta_deg.to_radians(),
                phi: p.phi_deg.to_radians(),
                n_iter: require_n(p.n)?,
                family,
            },
            single,
        ),
        Cmd::Wcc { point: p, family, tol } => (
            Command::Wcc {
                theta: p.theta_deg.to_radians(),
                phi: p.phi_deg.to_radians(),
                n_iter: require_n(p.n)?,
                family,
                tol,
            },
            single,
        ),
        Cmd::Surface { n, resolution } => {
            if resolution == 0 {
                return Err(CliError::Usage("--resolution must be positive".into()));
            }
            (Command::Surface { n_iter: require_n(n)?, resolution }, table)
        }
        Cmd::Simulate { theta_deg, phi_deg, n, campaign, resamples, noise } => {
            let n_iter = require_n(n)?;
            let (thetas, phi) = match (theta_deg, phi_deg) {
                (Some(t), Some(p)) => (t, p),
                (Some(_), None) => return Err(CliError::Usage("--phi-deg is required when --theta-deg is given".into())),
                (None, p) => (FIG4_THETAS_DEG.to_vec(), p.unwrap_or(FIG4_PHI_DEG)),
            };
            if resamples == 1 {
                return Err(CliError::Usage("--resamples must be 0 or at least 2".into()));
            }
            let trials = thetas
                .iter()
                .map(|t| {
                    let config = TrialConfig {
                        theta_true: t.to_radians(),
                        phi_true: phi.to_radians(),
                        n_iter,
                        shots: campaign.shots,
                        repeats: campaign.repeats,
                        seed: campaign.seed,
                        noise_model: noise.into(),
                    };
                    config.validate().map_err(constraint)?;
                    Ok(config)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            (Command::Simulate { trials, resamples }, table)
        }
        Cmd::Heisenberg { theta_deg, phi_deg, n_max, campaign } => {
            let (theta, phi) = (theta_deg.to_radians(), phi_deg.to_radians());
            for n in 1..=require_n(n_max)? {
                check_identifiable(theta, phi, n).map_err(constraint)?;
            }
            (
                Command::Heisenberg {
                    theta,
                    phi,
                    n_max,
                    shots: campaign.shots,
                    repeats: campaign.repeats,
                    seed: campaign.seed,
                },
                table,
            )
        }
    };
    Ok(RunConfig { command, format, output: cli.output })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbsRow {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QfimRow {
    pub family: String,
    pub n: u32,
    pub q_theta_theta: f64,
    pub q_theta_phi: f64,
    pub q_phi_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WccRow {
    pub family: String,
    pub n: u32,
    pub u_theta_phi: f64,
    pub max_abs: f64,
    pub wcc: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRow {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub n: u32,
    pub shots: u64,
    pub repeats: usize,
    pub m_mse_theta: f64,
    pub m_mse_phi: f64,
    pub cov_m: f64,
    pub qcrb_theta: f64,
    pub qcrb_phi: f64,
    pub err_theta: Option<f64>,
    pub err_phi: Option<f64>,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergRow {
    pub n: u32,
    pub m_times_mse_theta: f64,
    pub m_times_mse_phi: f64,
    pub qcrb_theta: f64,
    pub qcrb_phi: f64,
    pub snl_theta: f64,
    pub snl_phi: f64,
}

/// Short decimal form for text output.
fn short(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn write_table<R: Serialize>(rows: &[R], format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            writeln!(out)?;
        }
        Format::Csv | Format::Text => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn point(theta: f64, phi: f64) -> Result<ParameterPoint, CliError> {
    Ok(ParameterPoint::two(theta, phi)?)
}

/// Runs `config`, writing its output to `out`.
pub fn render(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let format = config.format;
    match &config.command {
        &Command::Probs { theta, phi, n_iter } => {
            let p = outcome_probabilities(theta, phi, n_iter).into_vec();
            if format == Format::Text {
                let line: Vec<String> = p.iter().map(|&v| short(v)).collect();
                writeln!(out, "{}", line.join(" "))?;
            } else {
                write_table(&[ProbsRow { p1: p[0], p2: p[1], p3: p[2], p4: p[3] }], format, out)?;
            }
        }
        &Command::Qfim { theta, phi, n_iter, family } => {
            let q = family_qfim(family.build(n_iter)?.as_ref(), &point(theta, phi)?)?;
            if format == Format::Text {
                for i in 0..2 {
                    writeln!(out, "{} {}", short(q.get(i, 0)), short(q.get(i, 1)))?;
                }
            } else {
                let row = QfimRow {
                    family: family.name().into(),
                    n: n_iter,
                    q_theta_theta: q.get(0, 0),
                    q_theta_phi: q.get(0, 1),
                    q_phi_phi: q.get(1, 1),
                };
                write_table(&[row], format, out)?;
            }
        }
        &Command::Wcc { theta, phi, n_iter, family, tol } => {
            let jac = derivatives(family.build(n_iter)?.as_ref(), &point(theta, phi)?)?;
            let u = uhlmann_curvature(jac.base(), &jac)?;
            let holds = wcc_holds(&u, tol);
            if format == Format::Text {
                let verdict = if holds { "holds" } else { "violated" };
                writeln!(out, "max |U_ij| = {:e} (wcc {verdict} at tol {tol:e})", u.max_abs())?;
            } else {
                let row = WccRow {
                    family: family.name().into(),
                    n: n_iter,
                    u_theta_phi: u.get(0, 1),
                    max_abs: u.max_abs(),
                    wcc: holds,
                };
                write_table(&[row], format, out)?;
            }
        }
        &Command::Surface { n_iter, resolution } => {
            let mut rows = Vec::with_capacity(resolution * resolution);
            for i in 0..resolution {
                let theta_deg = 360.0 * i as f64 / resolution as f64;
                for j in 0..resolution {
                    let phi_deg = 360.0 * j as f64 / resolution as f64;
                    let p = outcome_probabilities(theta_deg.to_radians(), phi_deg.to_radians(), n_iter).into_vec();
                    rows.push(SurfaceRow { theta_deg, phi_deg, p1: p[0], p2: p[1], p3: p[2], p4: p[3] });
                }
            }
            write_table(&rows, format, out)?;
        }
        Command::Simulate { trials, resamples } => {
            let rows = trials
                .iter()
                .map(|t| {
                    let s = if *resamples == 0 {
                        run_trials(t)?
                    } else {
                        run_trials_with_error_bars(t, *resamples)?
                    };
                    let (qcrb_theta, qcrb_phi) = qcrb_per_shot(t.theta_true, t.n_iter)?;
                    Ok(SimulateRow {
                        theta_deg: t.theta_true.to_degrees(),
                        phi_deg: t.phi_true.to_degrees(),
                        n: t.n_iter,
                        shots: t.shots,
                        repeats: t.repeats,
                        m_mse_theta: s.m_times_mse_theta,
                        m_mse_phi: s.m_times_mse_phi,
                        cov_m: s.m_times_covariance,
                        qcrb_theta,
                        qcrb_phi,
                        err_theta: s.err_theta,
                        err_phi: s.err_phi,
                        n_failed: s.n_failed,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            write_table(&rows, format, out)?;
        }
        &Command::Heisenberg { theta, phi, n_max, shots, repeats, seed } => {
            let ns: Vec<u32> = (1..=n_max).collect();
            let rows: Vec<HeisenbergRow> = heisenberg_sweep(theta, phi, &ns, shots, repeats, seed)?
                .into_iter()
                .map(|r| HeisenbergRow {
                    n: r.n_iter,
                    m_times_mse_theta: r.m_times_mse_theta,
                    m_times_mse_phi: r.m_times_mse_phi,
                    qcrb_theta: r.qcrb_theta,
                    qcrb_phi: r.qcrb_phi,
                    snl_theta: r.snl_theta,
                    snl_phi: r.snl_phi,
                })
                .collect();
            write_table(&rows, format, out)?;
        }
    }
    Ok(())
}

/// Runs `config` against `--output` or stdout.
pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    // render into memory first so a numerical failure leaves no partial file
    let mut buf = Vec::new();
    render(config, &mut buf)?;
    match &config.output {
        Some(path) => File::create(path)?.write_all(&buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

/// Full command-line entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_args(argv).and_then(|c| execute(&c));
    match result {
        Ok(()) => 0,
        Err(CliError::Info(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().trim_start_matches("error: "));
            e.exit_code()
        }
    }
}
