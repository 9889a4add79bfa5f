//! `brw`: mode solving, SPDC analysis and design search for AlGaN Bragg
//! reflection waveguides.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use brw_core::material::Polarization;
use brw_core::schmidt::Builder;

#[derive(Debug, Parser)]
#[command(name = "brw", version, about = "SPDC in multilayer Bragg reflection waveguides")]
struct Cli {
    /// Worker threads; 1 gives fully serial reference runs. Defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Material data file (TOML). Defaults to the bundled AlGaN model.
    #[arg(long, global = true)]
    material: Option<PathBuf>,

    /// Increase log verbosity (-v, -vv).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the guided modes of a structure at one wavelength.
    Modes(ModesArgs),
    /// Joint spectrum and entanglement report at one pump bandwidth.
    Analyze(AnalyzeArgs),
    /// Schmidt number, entropy and correlation versus pump bandwidth.
    Sweep(SweepArgs),
    /// Genetic search for separable designs.
    Optimize(OptimizeArgs),
    /// Central phase mismatch and poling period.
    Qpm(ProcessArgs),
    /// Spatial overlap of the pump, signal and idler modes.
    Overlap(ProcessArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolArg {
    Te,
    Tm,
}

impl From<PolArg> for Polarization {
    fn from(p: PolArg) -> Self {
        match p {
            PolArg::Te => Polarization::TE,
            PolArg::Tm => Polarization::TM,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BuilderArg {
    Full,
    Linear,
}

impl From<BuilderArg> for Builder {
    fn from(b: BuilderArg) -> Self {
        match b {
            BuilderArg::Full => Builder::Full,
            BuilderArg::Linear => Builder::Linear,
        }
    }
}

/// Which poling period drives the phase matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum PeriodArg {
    /// Cancel the computed central mismatch.
    Derived,
    /// Use the period written in the structure file.
    File,
}

#[derive(Debug, Args)]
struct ModesArgs {
    #[arg(long)]
    structure: PathBuf,
    /// Vacuum wavelength, nm.
    #[arg(long, default_value_t = 1550.0)]
    wavelength: f64,
    #[arg(long, value_enum, default_value_t = PolArg::Te)]
    pol: PolArg,
    /// Effective-index search window.
    #[arg(long, num_args = 2, value_names = ["N_MIN", "N_MAX"])]
    range: Option<Vec<f64>>,
    /// Transverse sampling step of the written profiles, nm.
    #[arg(long, default_value_t = 2.0)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProcessArgs {
    #[arg(long)]
    structure: PathBuf,
    /// Signal wavelength, nm.
    #[arg(long, default_value_t = 1550.0)]
    signal: f64,
    /// Idler wavelength, nm.
    #[arg(long, default_value_t = 1550.0)]
    idler: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct JsaArgs {
    /// JSA grid points per axis.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = BuilderArg::Full)]
    builder: BuilderArg,
    #[arg(long, value_enum, default_value_t = PeriodArg::Derived)]
    period: PeriodArg,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Pump bandwidth Δλ_p, nm.
    #[arg(long, allow_negative_numbers = true)]
    bandwidth: f64,
    #[command(flatten)]
    jsa: JsaArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Smallest pump bandwidth, nm.
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    /// Largest pump bandwidth, nm.
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 30)]
    steps: usize,
    /// Space the bandwidths geometrically.
    #[arg(long)]
    log: bool,
    #[command(flatten)]
    jsa: JsaArgs,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// GA configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the JSA grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Command failure with its exit code class.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(brw_core::Error),
}

impl Failure {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Core(brw_core::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_input_error() => 3,
            Failure::Core(_) => 4,
        }
    }
}

impl From<brw_core::Error> for Failure {
    fn from(e: brw_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), Failure> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads(cli.threads)?;
    let material = cli.material.unwrap_or_else(brw_core::material::default_material_path);
    match cli.command {
        Command::Modes(a) => commands::modes(&material, a),
        Command::Analyze(a) => commands::analyze(&material, a),
        Command::Sweep(a) => commands::sweep(&material, a),
        Command::Optimize(a) => commands::optimize(&material, a),
        Command::Qpm(a) => commands::qpm(&material, a),
        Command::Overlap(a) => commands::overlap(&material, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
