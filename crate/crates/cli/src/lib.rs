//! Command-line front end: problem files in, canonical reports out.
//!
//! Exit status: 0 when no violation was found among the inputs examined,
//! 1 when an explicit violation was found, 2 on any error.

pub mod commands;
pub mod problem;
pub mod report;

use std::path::PathBuf;

use arcstab_core::literal::ParseError;
use arcstab_core::parallel::Execution;
use arcstab_core::stability::CheckKind;
use arcstab_core::SlotOrder;
use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{CheckOptions, Functional, Outcome};
use crate::problem::{parse_epsilon, ProblemFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("problem file, line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("{location}: {error}")]
    Literal { location: String, error: ParseError },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] arcstab_core::Error),
}

pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "arcstab", version, about = "Weights, norms and stability checks for arcs acting on pairs")]
pub struct Cli {
    /// Relative precision for series inverses.
    #[arg(long, global = true, env = "ARC_STAB_PRECISION")]
    pub precision: Option<u32>,
    /// Emit the report as canonical JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Disable the worker pool.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight of an arc on the pair, with the specialization cross-check.
    Weight {
        file: PathBuf,
        #[arg(long)]
        arc: String,
    },
    /// Minimum weight over cocharacters in a box.
    #[command(name = "scan-1ps")]
    Scan1ps {
        file: PathBuf,
        #[arg(long = "box")]
        box_size: Option<u32>,
        /// Only cocharacters with entries summing to zero.
        #[arg(long)]
        trace_zero: bool,
    },
    /// Smith normal form over the power-series ring.
    Snf {
        file: PathBuf,
        #[arg(long)]
        arc: String,
    },
    /// Norm of an arc with respect to the pair.
    Norm {
        file: PathBuf,
        #[arg(long)]
        arc: String,
        #[arg(long, value_enum)]
        slot_order: Option<SlotOrderArg>,
    },
    /// Infimum of the norm over twists by the torus.
    ReducedNorm {
        file: PathBuf,
        #[arg(long)]
        arc: String,
    },
    /// Numerical stability test against every arc in the file.
    Check {
        #[arg(value_enum)]
        kind: CheckArg,
        file: PathBuf,
        #[arg(long)]
        k: Option<u32>,
        /// Rational ε replacing 1/(k+1).
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, value_enum)]
        slot_order: Option<SlotOrderArg>,
        /// Accept functionals that are not proper along the torus.
        #[arg(long)]
        allow_improper: bool,
    },
    /// Fitted slope of a log-norm functional against log|z|⁻¹.
    Slope {
        file: PathBuf,
        #[arg(long)]
        arc: String,
        #[arg(long, value_enum, default_value = "weight")]
        functional: FunctionalArg,
        /// Write (log|z|⁻¹, value) columns to this path.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SlotOrderArg {
    Paper,
    Analytic,
}

impl From<SlotOrderArg> for SlotOrder {
    fn from(a: SlotOrderArg) -> Self {
        match a {
            SlotOrderArg::Paper => SlotOrder::Paper,
            SlotOrderArg::Analytic => SlotOrder::Analytic,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CheckArg {
    Semistable,
    Stable,
    Polystable,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FunctionalArg {
    Weight,
    Norm,
    Matrix,
    Reduced,
}

/// Result of one invocation: what to print and the exit status.
pub struct Run {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let load = |file: &PathBuf| ProblemFile::read(file)?.load(cli.precision);
    match &cli.command {
        Command::Weight { file, arc } => commands::weight(&load(file)?, arc),
        Command::Scan1ps { file, box_size, trace_zero } => {
            commands::scan_1ps(&load(file)?, *box_size, *trace_zero, exec)
        }
        Command::Snf { file, arc } => commands::snf(&load(file)?, arc),
        Command::Norm { file, arc, slot_order } => commands::norm(&load(file)?, arc, slot_order.map(Into::into)),
        Command::ReducedNorm { file, arc } => commands::reduced_norm(&load(file)?, arc),
        Command::Check { kind, file, k, epsilon, slot_order, allow_improper } => {
            let kind = match kind {
                CheckArg::Semistable => CheckKind::Semistable,
                CheckArg::Stable => CheckKind::Stable,
                CheckArg::Polystable => CheckKind::Polystable,
            };
            let epsilon = epsilon.as_deref().map(parse_epsilon).transpose()?;
            let opts = CheckOptions {
                k: *k,
                epsilon,
                slot_order: slot_order.map(Into::into),
                allow_improper: *allow_improper,
                exec,
            };
            commands::check(&load(file)?, kind, &opts)
        }
        Command::Slope { file, arc, functional, plot_data } => {
            let functional = match functional {
                FunctionalArg::Weight => Functional::Weight,
                FunctionalArg::Norm => Functional::Norm,
                FunctionalArg::Matrix => Functional::Matrix,
                FunctionalArg::Reduced => Functional::Reduced,
            };
            commands::slope(&load(file)?, arc, functional, plot_data.as_deref(), exec)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Run { stdout: String::new(), stderr: text, code }
            } else {
                Run { stdout: text, stderr: String::new(), code }
            };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let stdout = if cli.json { report::to_json(&out.report) } else { report::to_text(&out.report) };
            Run { stdout, stderr: String::new(), code: out.status.code() }
        }
        Err(e) => Run { stdout: String::new(), stderr: format!("error: {e}\n"), code: EXIT_ERROR },
    }
}
