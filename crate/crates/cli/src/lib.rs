//! Command-line front end for `qconcept`.
//!
//! Every subcommand builds a JSON report. Without `--json` a short human
//! summary goes to standard output instead. When an output directory is set
//! (flag or `QCONCEPT_OUT_DIR`) the report files and a run manifest are
//! written there atomically.

mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qconcept::classicality::Connective;
use serde::Serialize;
use thiserror::Error;

pub use output::{FileDigest, RunManifest};

/// Environment variable consulted when `--out-dir` is absent.
pub const OUT_DIR_ENV: &str = "QCONCEPT_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qconcept", version, about = "Quantum models of concept combination")]
pub struct Cli {
    /// Print the full JSON report instead of the human summary.
    #[arg(long, global = true)]
    pub json: bool,

    /// Directory for report files and the run manifest.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classicality diagnostics for membership triples.
    Classicality(Source),
    /// Fock-space interference angle for one membership triple.
    Fock(FockArgs),
    /// CHSH statistic from four coincidence experiments.
    Chsh(Source),
    /// Explicit disjunction model over choose-one exemplar weights.
    DisjunctionModel(DisjunctionArgs),
    /// Interference patterns for a choose-one exemplar table.
    Wavefield(WavefieldArgs),
    /// List the bundled datasets, or print one.
    Datasets(DatasetsArgs),
}

/// Where the rows come from: a CSV file or a bundled dataset.
#[derive(Debug, Clone, Args)]
pub struct Source {
    /// CSV input file.
    #[arg(long, conflicts_with = "dataset")]
    pub input: Option<PathBuf>,
    /// Bundled dataset id (see `qconcept datasets`).
    #[arg(long)]
    pub dataset: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FockArgs {
    #[arg(long)]
    pub mu_a: f64,
    #[arg(long)]
    pub mu_b: f64,
    #[arg(long)]
    pub mu_joint: f64,
    #[arg(long, value_enum)]
    pub connective: ConnectiveArg,
    /// Weight m² of the quantum-logical sector; n² = 1 − m².
    #[arg(long = "m2", default_value_t = 0.3)]
    pub m_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConnectiveArg {
    And,
    Or,
}

impl From<ConnectiveArg> for Connective {
    fn from(c: ConnectiveArg) -> Self {
        match c {
            ConnectiveArg::And => Connective::And,
            ConnectiveArg::Or => Connective::Or,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DisjunctionArgs {
    #[command(flatten)]
    pub source: Source,
    /// Include the two state vectors as [re, im] pairs.
    #[arg(long)]
    pub emit_vectors: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WavefieldArgs {
    #[command(flatten)]
    pub source: Source,
    /// Raster size as NXxNY.
    #[arg(long, default_value = "512x512", value_parser = parse_grid)]
    pub grid: (usize, usize),
    #[arg(long, value_enum, default_value_t = PatternFormat::Pgm)]
    pub format: PatternFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternFormat {
    Pgm,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct DatasetsArgs {
    /// Print the rows of this dataset instead of the catalog.
    #[arg(long)]
    pub show: Option<String>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (x, y) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NXxNY, got {s:?}"))?;
    let parse = |v: &str| -> Result<usize, String> {
        match v.trim().parse::<usize>() {
            Ok(n) if n >= 2 => Ok(n),
            _ => Err(format!("grid size {v:?} must be an integer of at least 2")),
        }
    };
    Ok((parse(x)?, parse(y)?))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) | CliError::Io(_) => EXIT_VALIDATION,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
        }
    }

    /// The machine-readable form written to standard error.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } }).to_string()
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let err = CliError::Usage(e.to_string().trim_end().to_owned());
            let _ = writeln!(stderr, "{}", err.to_json());
            return err.exit_code();
        }
    };
    let recorded = output::recorded_args(&args);
    match execute(&cli, &recorded, stdout) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let _ = writeln!(stderr, "{}", err.to_json());
            err.exit_code()
        }
    }
}

fn execute(cli: &Cli, recorded: &[String], stdout: &mut dyn Write) -> Result<(), CliError> {
    if matches!(cli.command, Command::Wavefield(_)) && cli.out_dir.is_none() {
        return Err(CliError::Usage(format!(
            "wavefield writes pattern files; pass --out-dir or set {OUT_DIR_ENV}"
        )));
    }
    let outcome = commands::dispatch(cli)?;
    if let Some(dir) = &cli.out_dir {
        output::write_outputs(dir, recorded, &outcome)?;
    }
    if cli.json {
        serde_json::to_writer_pretty(&mut *stdout, &outcome.report).map_err(std::io::Error::from)?;
        writeln!(stdout)?;
    } else {
        stdout.write_all(outcome.human.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(parse_grid("512x512"), Ok((512, 512)));
        assert_eq!(parse_grid("64X48"), Ok((64, 48)));
        assert!(parse_grid("512").is_err());
        assert!(parse_grid("1x4").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
