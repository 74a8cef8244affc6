//! `cone-riccati`: solve, re-check and generate cone-preserving Riccati problems.

mod commands;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cone_riccati::riccati::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use cone_riccati::spectral::DEFAULT_MARGIN;

/// Process exit codes; shell pipelines branch on these.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    IoOrSchema = 1,
    EquivalenceNegative = 2,
    HypothesisFailure = 3,
    NonConverged = 4,
    InconclusiveAtMargin = 5,
    CheckFailed = 6,
    Numerical = 7,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] cone_riccati::Error),
}

#[derive(Debug, Parser)]
#[command(name = "cone-riccati", version, about = "Cone-preserving solutions of XBX + DX + XA + C = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and write a report.
    Solve {
        input: PathBuf,
        /// Relative residual tolerance.
        #[arg(long, env = "CONE_RICCATI_TOL", default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Dead-band around zero for spectral abscissas.
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        /// Store every iterate in the report.
        #[arg(long)]
        trace: bool,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a certificate report against its problem file.
    Check { report: PathBuf, problem: PathBuf },
    /// Generate a seeded problem file.
    Gen {
        #[arg(long, default_value = "orthant-m-matrix")]
        kind: cone_riccati::instances::InstanceKind,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        shift: f64,
        #[arg(long, default_value_t = 10.0)]
        cond_cap: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve {
            input,
            tol,
            max_iter,
            margin,
            trace,
            out,
        } => commands::solve(
            &input,
            &commands::SolveFlags {
                tol,
                max_iter,
                margin,
                trace,
            },
            out.as_deref(),
        ),
        Command::Check { report, problem } => commands::check(&report, &problem),
        Command::Gen {
            kind,
            n,
            seed,
            shift,
            cond_cap,
            out,
        } => commands::gen(kind, n, seed, shift, cond_cap, out.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::IoOrSchema as u8)
        }
    }
}
