//! Command-line front end: parameter sweeps and validation reports.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 precondition violation.

pub mod config;
pub mod output;
pub mod presets;
mod sweeps;
mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{parse_config, Axis, ConfigError, Format, Grid, Mode, SweepConfig, SystemKind};
pub use output::{format_float, SweepTable};
pub use presets::Preset;
pub use sweeps::{run_steady_sweep, run_transient_sweep, run_waveguide_sweep};
pub use validate::{run_validation, CommutatorRecord, IntegratorOrder, Summary, ValidationRecord, ValidationReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VALIDATION_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub(crate) fn csv(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG_ERROR,
            CliError::Precondition(_) => EXIT_PRECONDITION,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ptnoise", version, about = "Noise-induced nonreciprocity in PT-symmetric resonators and waveguides")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transient transmission and reflection of the coupled resonators.
    Transient(RunArgs),
    /// Steady-state transmission of the coupled resonators.
    Steady(RunArgs),
    /// Waveguide outputs against length.
    Waveguide(RunArgs),
    /// Cross-check closed forms against the numerical oracles.
    Validate(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Built-in parameter set.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Worker threads; all outputs are independent of this value.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Transient(a) | Command::Steady(a) | Command::Waveguide(a) | Command::Validate(a) => a,
        }
    }

    fn mode(&self) -> Mode {
        match self {
            Command::Transient(_) => Mode::Transient,
            Command::Steady(_) => Mode::Steady,
            Command::Waveguide(_) => Mode::LengthSweep,
            Command::Validate(_) => Mode::Validate,
        }
    }
}

/// Loads the config selected by `args` and reconciles it with the
/// subcommand.
pub fn load_config(mode: Mode, args: &RunArgs) -> Result<SweepConfig, CliError> {
    let mut config = match (&args.config, args.preset) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::invalid("--preset", "cannot be combined with --config").into());
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::invalid("--config", format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        (None, Some(preset)) => {
            if preset.mode() != mode {
                return Err(ConfigError::invalid(
                    "--preset",
                    format!("preset is for the {} mode", preset.mode().as_str()),
                )
                .into());
            }
            preset.config()
        }
        (None, None) => SweepConfig::default(),
    };
    let system = match mode {
        Mode::Transient | Mode::Steady => Some(SystemKind::Resonator),
        Mode::LengthSweep => Some(SystemKind::Waveguide),
        Mode::Validate => None,
    };
    if let (Some(want), Some(have)) = (system, config.system) {
        if want != have {
            return Err(ConfigError::invalid("system", format!("{} needs system {:?}", mode.as_str(), want).to_lowercase()).into());
        }
    }
    if let Some(have) = config.mode {
        if have != mode {
            return Err(ConfigError::invalid("mode", format!("config mode {} does not match the subcommand", have.as_str())).into());
        }
    }
    config.mode = Some(mode);
    if system.is_some() {
        config.system = system;
    }
    if let Some(seed) = args.seed {
        config.oracle.seed = seed;
    }
    if let Some(format) = args.format {
        config.output.format = Some(format);
    }
    if let Some(out) = &args.out {
        config.output.path = Some(out.clone());
    }
    if mode == Mode::Validate && config.output.format == Some(Format::Csv) {
        return Err(ConfigError::invalid("output.format", "validation reports are JSON").into());
    }
    config.check()?;
    Ok(config)
}

/// Output text and whether the run passed.
pub fn execute(config: &SweepConfig) -> Result<(String, bool), CliError> {
    let format = config.output.format.unwrap_or(Format::Csv);
    match config.mode.unwrap_or(Mode::Validate) {
        Mode::Transient => Ok((run_transient_sweep(config)?.render(format)?, true)),
        Mode::Steady => Ok((run_steady_sweep(config)?.render(format)?, true)),
        Mode::LengthSweep => Ok((run_waveguide_sweep(config)?.render(format)?, true)),
        Mode::Validate => {
            let report = run_validation(config)?;
            Ok((output::render_json(&report)?, report.summary.pass))
        }
    }
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn run_command(command: &Command, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let config = load_config(command.mode(), command.args())?;
    let work = || execute(&config);
    let (text, pass) = match command.args().threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ConfigError::invalid("--threads", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    write_output(config.output.path.as_deref(), &text, stdout)?;
    Ok(pass)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    match run_command(&cli.command, stdout) {
        Ok(true) => EXIT_PASS,
        Ok(false) => {
            let _ = writeln!(stderr, "validation failed");
            EXIT_VALIDATION_FAILURE
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
