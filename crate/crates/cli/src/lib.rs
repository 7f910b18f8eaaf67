//! Command-line front end: `ratcap <analytic|exact|simulate|figure|verify> [flags]`.
//!
//! Every command produces one table, written as CSV (a `#` line with the
//! JSON run spec, then a header row) or as a JSON document.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::Parser;
use thiserror::Error;

pub mod commands;
pub mod figures;
pub mod output;
pub mod spec;

pub use output::{Cell, Format, Table};
pub use spec::{Cli, Command, RunSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Params(#[from] ratcap_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

/// Result of a run that produced output.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub spec: RunSpec,
    pub table: Table,
    /// Failed checks (`simulate`, `verify`); non-empty means exit code 3.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_VERIFICATION
        }
    }
}

/// Computes the table for `cli` without writing anything.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let mut spec = RunSpec::from_cli(cli)?;
    let (table, failures) = match spec.command {
        Command::Analytic => (commands::analytic(&spec)?, Vec::new()),
        Command::Exact => (commands::exact(&spec)?, Vec::new()),
        Command::Simulate => commands::simulate(&spec)?,
        Command::Verify => commands::verify(cli.perturb_p),
        Command::Figure => {
            let id = spec
                .figure
                .ok_or_else(|| CliError::Usage("figure needs --figure <1..7>".into()))?;
            let (table, profile) = figures::figure(id, &spec.params)?;
            spec.profile = Some(profile);
            (table, Vec::new())
        }
    };
    Ok(Outcome { spec, table, failures })
}

pub fn write_outcome<W: Write + ?Sized>(w: &mut W, outcome: &Outcome) -> io::Result<()> {
    match outcome.spec.output.format {
        Format::Csv => output::write_csv(w, &outcome.spec, &outcome.table),
        Format::Json => output::write_json(w, &outcome.spec, &outcome.table),
    }
}

/// Runs `cli`, writing to `--out` or to `stdout`, and returns the exit code.
/// Diagnostics go to `stderr`.
pub fn run<W: Write + ?Sized, E: Write + ?Sized>(cli: &Cli, stdout: &mut W, stderr: &mut E) -> i32 {
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let written = match &outcome.spec.output.path {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_outcome(&mut w, &outcome)?;
            w.flush()
        }),
        None => write_outcome(stdout, &outcome),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_IO;
    }
    for f in outcome.failures.iter().take(20) {
        let _ = writeln!(stderr, "FAIL {f}");
    }
    if outcome.failures.len() > 20 {
        let _ = writeln!(stderr, "... {} more", outcome.failures.len() - 20);
    }
    outcome.exit_code()
}

/// Parses `args` (including the program name) and runs. Usage errors from
/// argument parsing are reported on `stderr` with exit code 2.
pub fn run_args<I, T, W, E>(args: I, stdout: &mut W, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write + ?Sized,
    E: Write + ?Sized,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
            } else {
                let _ = write!(stdout, "{e}");
            }
            code
        }
    }
}
