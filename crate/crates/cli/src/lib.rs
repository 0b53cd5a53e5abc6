//! Command-line front end: binds a configuration file to one experiment and
//! writes plot-ready CSV or JSON results plus a provenance record.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

pub use config::{ConfigError, RunConfig};
pub use output::{Format, OutputDir, Provenance, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("physics error: {0}")]
    Physics(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Physics(_) => EXIT_PHYSICS,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn physics(e: impl std::fmt::Display) -> Self {
        CliError::Physics(e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "taptrap", version, about = "Tapered Paul trap simulation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (`key = value` lines); defaults apply without it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configuration's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Effective potential on a grid in the x-z plane.
    PseudoMap,
    /// Full RF trajectory of one ion.
    Simulate,
    /// Radial secular frequencies against axial position, with fits.
    ScanAxial,
    /// Up and down modulation-frequency sweeps.
    Sweep,
    /// Micromotion compensation voltages.
    Compensate,
    /// Zeeman and motional sideband line positions.
    Sidebands,
    /// Solve the electrode mesh and cache the charge bases.
    SolveField,
    /// Calibrate the drive to the target secular frequencies.
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PseudoMap => "pseudo-map",
            Command::Simulate => "simulate",
            Command::ScanAxial => "scan-axial",
            Command::Sweep => "sweep",
            Command::Compensate => "compensate",
            Command::Sidebands => "sidebands",
            Command::SolveField => "solve-field",
            Command::Calibrate => "calibrate",
        }
    }
}

pub fn config_hash(cfg: &RunConfig) -> String {
    Sha256::digest(cfg.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", config::Value::Integer(seed));
    }
    Ok(cfg)
}

/// Runs one parsed invocation and returns the process exit code. Errors are
/// reported on standard error.
pub fn execute(cli: &Cli) -> i32 {
    let cfg = match load_config(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("taptrap: {e}");
            return e.exit_code();
        }
    };
    let mut out = match OutputDir::create(&cli.out, cli.format) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("taptrap: cannot create {}: {e}", cli.out.display());
            return EXIT_IO;
        }
    };
    let result = commands::dispatch(cli.command, &cfg, &mut out);
    let (code, error) = match &result {
        Ok(()) => (EXIT_OK, None),
        Err(e) => {
            eprintln!("taptrap: {e}");
            (e.exit_code(), Some(e.to_string()))
        }
    };
    let record = Provenance {
        command: cli.command.name().to_string(),
        config_file: cli.config.as_ref().map(|p| p.display().to_string()),
        config_sha256: config_hash(&cfg),
        seed: cfg.int("seed"),
        format: cli.format,
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        exit_code: code,
        error,
        outputs: out.written.clone(),
    };
    if let Err(e) = out.write_json("provenance.json", &record) {
        eprintln!("taptrap: cannot write provenance: {e}");
        return if code == EXIT_OK { EXIT_IO } else { code };
    }
    code
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
