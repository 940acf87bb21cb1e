//! Config-driven batch commands behind the `qvortex` binary.
//!
//! Every command reads a [`RunConfig`] and writes into one output
//! directory:
//!
//! | command   | writes                                              |
//! |-----------|-----------------------------------------------------|
//! | `build`   | `state.qvg`, `state_nu.qvg`, `state.json`           |
//! | `evolve`  | `evolve/` (snapshots, `monitors.csv`, manifest)     |
//! | `radiate` | `power.csv`, `radiate.json`                         |
//! | `verify`  | `verify.json`                                       |
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical abort or
//! failed verification, 3 I/O error.

mod commands;
mod config;
mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_build, cmd_evolve, cmd_radiate, RadiateSummary, StateReport, EVOLVE_DIR, POWER_FILE, RADIATE_FILE,
    STATE_FILE, STATE_NU_FILE, STATE_REPORT_FILE,
};
pub use config::{
    example_ring_config, CubeGrid, EvolveSection, Geometry, GridConfig, PotentialConfig, RunConfig, SourceConfig,
    VerifySection,
};
pub use verify::{cmd_verify, Check, VerifyReport, VERIFY_FILE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::VerifyFailed(_) => EXIT_NUMERICAL,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(
                E::Io { .. }
                | E::BadMagic
                | E::UnsupportedVersion(_)
                | E::UnsupportedDtype(_)
                | E::TruncatedPayload { .. }
                | E::TrailingData { .. }
                | E::DimsOverflow
                | E::MeshFormat { .. },
            ) => EXIT_IO,
            CliError::Core(_) => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qvortex", version, about = "Multi-valued vortex states, nu-transformed evolution and radiated power")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the initial state and its quantization report.
    Build(CommonArgs),
    /// Evolve the built state and write snapshots and monitors.
    Evolve(CommonArgs),
    /// Compute the radiated-power series of an evolved run.
    Radiate(CommonArgs),
    /// Run the invariant suite and write a pass/fail report.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON run configuration (optional for `verify`).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for randomized checks; overrides the config.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

/// Resolved inputs of one command.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub config: RunConfig,
    pub out: PathBuf,
    /// Directory that relative paths in the config resolve against.
    pub base: PathBuf,
    pub seed: u64,
}

impl Invocation {
    pub fn new(config: RunConfig, out: impl Into<PathBuf>) -> Self {
        let seed = config.seed;
        Invocation {
            config,
            out: out.into(),
            base: PathBuf::from("."),
            seed,
        }
    }

    fn from_args(args: &CommonArgs, require_config: bool) -> Result<Self, CliError> {
        let (config, base) = match &args.config {
            Some(p) => (
                RunConfig::read(p)?,
                p.parent().map(|d| d.to_path_buf()).unwrap_or_else(|| PathBuf::from(".")),
            ),
            None if require_config => return Err(CliError::Config("--config is required".into())),
            None => (example_ring_config(), PathBuf::from(".")),
        };
        let out = args
            .out
            .clone()
            .or_else(|| config.output.clone())
            .ok_or_else(|| CliError::Config("no output directory: pass --out or set `output`".into()))?;
        let seed = args.seed.unwrap_or(config.seed);
        Ok(Invocation {
            config,
            out,
            base,
            seed,
        })
    }
}

/// Runs one parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (args, require) = match &cli.command {
        Command::Verify(a) => (a, false),
        Command::Build(a) | Command::Evolve(a) | Command::Radiate(a) => (a, true),
    };
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = Invocation::from_args(args, require).and_then(|inv| match &cli.command {
        Command::Build(_) => cmd_build(&inv).map(|r| {
            println!(
                "built state: gamma={} nu={} single_valued={}",
                r.metadata.gamma, r.nu, r.metadata.quantization.single_valued
            )
        }),
        Command::Evolve(_) => cmd_evolve(&inv).map(|m| {
            println!("evolved {} steps, {} snapshots", m.steps, m.snapshots.len())
        }),
        Command::Radiate(_) => cmd_radiate(&inv).map(|s| println!("emitted energy {} over {} frames", s.delta_e, s.frames)),
        Command::Verify(_) => cmd_verify(&inv).and_then(|r| {
            let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            println!("{} of {} checks passed", r.checks.len() - failed.len(), r.checks.len());
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::VerifyFailed(failed.join(", ")))
            }
        }),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
