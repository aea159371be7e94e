//! Command-line front end for the `dualgap` library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure
//! (outputs are still written when a solver fails to converge).

pub mod commands;
pub mod config;
pub mod expr;
pub mod plot;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use crate::config::{Cli, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Error)]
#[error("numerical failure: {0}")]
pub struct NumericalError(pub String);

/// Sorts library errors into configuration and numerical failures.
pub fn core_error(e: dualgap::Error) -> anyhow::Error {
    use dualgap::Error::*;
    match e {
        NonFinite { .. } | NotPositiveDefinite { .. } | NotEquilibrated { .. } => {
            NumericalError(e.to_string()).into()
        }
        _ => ConfigError(e.to_string()).into(),
    }
}

fn ratios_path(plot: &Path) -> PathBuf {
    let stem = plot
        .file_stem()
        .map_or_else(|| "plot".into(), |s| s.to_string_lossy().into_owned());
    plot.with_file_name(format!("{stem}-ratios.svg"))
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())).into())
}

fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<NumericalError>().is_some() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (kind, flags) = cli.command.split();
    let outcome = RunConfig::resolve(kind, flags)
        .map_err(anyhow::Error::from)
        .and_then(|cfg| {
            let art = commands::execute(kind, &cfg)?;
            match &cfg.output {
                Some(path) => write_file(path, &art.main)?,
                None => {
                    let mut out = std::io::stdout().lock();
                    out.write_all(art.main.as_bytes())?;
                    out.flush()?;
                }
            }
            if let (Some(path), Some((conv, ratios))) = (&cfg.plot, &art.plots) {
                write_file(path, conv)?;
                write_file(&ratios_path(path), ratios)?;
            }
            Ok(art.ok)
        });
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!(
                "numerical failure: not every solve converged or a residual exceeded its tolerance"
            );
            EXIT_NUMERICAL
        }
        Err(e) => {
            eprintln!("{e}");
            exit_code(&e)
        }
    }
}
