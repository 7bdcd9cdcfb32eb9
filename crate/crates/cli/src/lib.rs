//! `levylab` command-line runner: argument parsing, config files, artifact
//! output and exit codes.

pub mod commands;
pub mod config;
pub mod table;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

pub use commands::{run, Artifact};
pub use config::{Experiment, ExperimentConfig, Format, Params};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "levylab",
    version,
    about = "Seeded concentration-of-measure experiments"
)]
pub struct Cli {
    /// Also write the effective configuration to this file.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact cap concentration curve of S^n (--n, --eps, --steps).
    AlphaExact(Params),
    /// Monte Carlo concentration of the S^{d-1} hemisphere (--d, --eps, --steps, --m).
    AlphaMc(Params),
    /// Normal Levy bound at (--n, --eps); a curve with --steps.
    LevyBound(Params),
    /// Principal angles of two random rank-n frames in R^d (--d, --n, --theta).
    Angles(Params),
    /// Isometry bound on --k random frame pairs (--d, --n, --k, --m, --theta).
    IsometryCheck(Params),
    /// Proximity mass between two frames (--d, --n, --eps, --m, --theta).
    Proximity(Params),
    /// Three-mask counterexample on S^{d-1} (--d, --eps, --budget).
    Leader(Params),
    /// Free-group counterexample on the ball of radius R (-R, --eps, --k, --m, --budget).
    F2(Params),
    /// Lifted hemisphere covers of S^{d-1} and S^{n-1} (--d, --n, --m, --eps).
    LiftCover(Params),
    /// Essential-element scan of the hemisphere cover (--d, --eps, --budget, --group z2|cyclic|haar, --k).
    Scan(Params),
    /// Almost-invariant vector search (--group cyclic|z2 with --d, f2 with -R).
    AlmostInvariant(Params),
    /// Folner subset search (--group shift with --d, f2 with -R; --n, --strategy).
    Folner(Params),
    /// Folner-type projection sequence with a hemisphere cover (--d, --eps, --m, --budget, --group z2|shift).
    LevySequence(Params),
    /// Hamming ratios of the adjacent-swap pair on --n points.
    Hamming(Params),
    /// Runs the experiment described by a key = value config file.
    Run { config: PathBuf },
}

impl Command {
    pub fn into_config(self) -> Result<ExperimentConfig> {
        let (experiment, params) = match self {
            Command::AlphaExact(p) => (Experiment::AlphaExact, p),
            Command::AlphaMc(p) => (Experiment::AlphaMc, p),
            Command::LevyBound(p) => (Experiment::LevyBound, p),
            Command::Angles(p) => (Experiment::Angles, p),
            Command::IsometryCheck(p) => (Experiment::IsometryCheck, p),
            Command::Proximity(p) => (Experiment::Proximity, p),
            Command::Leader(p) => (Experiment::Leader, p),
            Command::F2(p) => (Experiment::F2, p),
            Command::LiftCover(p) => (Experiment::LiftCover, p),
            Command::Scan(p) => (Experiment::Scan, p),
            Command::AlmostInvariant(p) => (Experiment::AlmostInvariant, p),
            Command::Folner(p) => (Experiment::Folner, p),
            Command::LevySequence(p) => (Experiment::LevySequence, p),
            Command::Hamming(p) => (Experiment::Hamming, p),
            Command::Run { config } => {
                let text = fs::read_to_string(&config)
                    .with_context(|| format!("reading {}", config.display()))?;
                return ExperimentConfig::from_text(&text);
            }
        };
        Ok(ExperimentConfig::new(experiment, params))
    }
}

/// Runs `config`, writing the artifact to `--out` (and a summary table to
/// `stdout`) or the artifact itself to `stdout`.
pub fn execute(config: &ExperimentConfig, stdout: &mut impl Write) -> Result<()> {
    let artifact = run(config)?;
    match &config.params.out {
        Some(path) => {
            fs::write(path, &artifact.body)
                .with_context(|| format!("writing {}", path.display()))?;
            write!(stdout, "{}", artifact.summary)?;
            writeln!(stdout, "wrote {}", path.display())?;
        }
        None => stdout.write_all(artifact.body.as_bytes())?,
    }
    Ok(())
}

/// Exit status for an error: usage problems map to 2, resource limits to 3.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use levylab_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidArgument(_)
                | E::Parse(_)
                | E::RankDeficient { .. }
                | E::SupportViolation { .. } => EXIT_USAGE,
                E::ResourceLimit(_) => EXIT_RESOURCE,
                E::Consistency(_) => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}
