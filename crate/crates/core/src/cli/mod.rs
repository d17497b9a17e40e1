//! The `regforge` command-line front end.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure (Riccati
//! non-convergence or a diverged simulation), 3 I/O error.

mod commands;
pub mod csv;
pub mod report;
pub mod scenario;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Parser, Subcommand, ValueEnum};

use crate::observer::Convention;
use crate::plant::PlantPreset;

pub use report::RunReport;
pub use scenario::{Artifact, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Validation,
            message: msg.into(),
        }
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Numerical,
            message: msg.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError {
            kind: ErrorKind::Io,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Numerical => 2,
            ErrorKind::Io => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error::*;
        match e {
            NotConverged { .. } | Singular | SingularLoop => CliError::numerical(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure8Controller {
    OpenLoop,
    Lqr,
    Observer,
    ObserverStable,
    All,
}

#[derive(Debug, Parser)]
#[command(
    name = "regforge",
    version,
    about = "Turbine-generator plant modelling, LQR/observer synthesis and simulation"
)]
pub struct Cli {
    /// Output directory for CSV, SVG and report files.
    #[arg(long, global = true, env = "REGFORGE_OUT", default_value = ".")]
    pub out: PathBuf,

    /// Which trajectory artifacts to write. Overrides a scenario's `outputs`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Plant model variant. Overrides a scenario's `plant.preset`.
    #[arg(long, global = true, value_parser = preset_parser())]
    pub preset: Option<PlantPreset>,

    /// Observer compensator wiring. Overrides a scenario's `controller.convention`.
    #[arg(long, global = true, value_parser = convention_parser())]
    pub convention: Option<Convention>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the plant model from a parameter file.
    Plant {
        #[arg(long)]
        params: PathBuf,
    },
    /// Compute controller gains and stability verdicts for a scenario.
    Synthesize {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Simulate a scenario, or every scenario file in a directory.
    Simulate {
        #[arg(long, required_unless_present = "batch", conflicts_with = "batch")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        batch: Option<PathBuf>,
    },
    /// Step-response metrics of a scenario run or a trajectory CSV.
    Metrics {
        #[arg(long, required_unless_present = "input", conflicts_with = "input")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Regenerate the data behind one of the reference figures.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(4..=8))]
        figure: u8,
        /// Controllers to run for figure 8.
        #[arg(long, value_enum, default_value_t = Figure8Controller::All)]
        controller: Figure8Controller,
    },
}

fn preset_parser() -> impl TypedValueParser<Value = PlantPreset> {
    PossibleValuesParser::new(PlantPreset::ALL.map(PlantPreset::name))
        .map(|s| PlantPreset::parse(&s).expect("restricted to known names"))
}

fn convention_parser() -> impl TypedValueParser<Value = Convention> {
    PossibleValuesParser::new(Convention::ALL.map(Convention::name))
        .map(|s| Convention::parse(&s).expect("restricted to known names"))
}

/// Parses `args` (program name first) and runs the command. Normal output
/// goes to `out`, diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match commands::dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
