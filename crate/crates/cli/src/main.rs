use std::io;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use levylab_cli::{execute, exit_code, Cli, EXIT_USAGE};

fn init_threads() -> Result<()> {
    let Ok(value) = std::env::var("LEVYLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        levylab_core::Error::InvalidArgument(format!("LEVYLAB_THREADS=`{value}` is not a count"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    init_threads()?;
    let config = cli.command.into_config()?;
    if let Some(path) = &cli.save_config {
        std::fs::write(path, config.to_text())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    execute(&config, &mut io::stdout().lock())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
