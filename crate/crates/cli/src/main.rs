//! `charmat`: solve, analyse and sweep boundary-value problems described in
//! JSON problem files.
//!
//! Exit codes: 0 uniquely solvable (or all checks passed), 1 input error,
//! 2 defective problem, 3 threshold exceeded or hypothesis check failed.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Settings;
use input::Problem;
use output::Format;

const EXIT_INPUT: u8 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "charmat",
    version,
    about = "Characteristic-matrix analysis of linear boundary-value problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Grid nodes on [a, b].
    #[arg(long, global = true)]
    nodes: Option<usize>,

    /// Integrator substeps per grid cell.
    #[arg(long, global = true)]
    substeps: Option<usize>,

    /// Relative singular-value tolerance for rank decisions.
    #[arg(long, global = true)]
    rank_tol: Option<f64>,

    /// Parameter value substituted for `eps` (solve, analyze, oracle-compare).
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    eps: f64,

    /// Comma-separated, strictly decreasing ε values for sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    eps_grid: Option<Vec<f64>>,

    /// Highest derivative layer written with the solution samples.
    #[arg(long, global = true, default_value_t = 0)]
    layers: usize,

    /// Agreement threshold for oracle-compare.
    #[arg(long, global = true, default_value_t = 1e-5)]
    threshold: f64,

    /// Directory for report and data files.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Format of tabular data files.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the problem; writes samples, residuals and the solvability report.
    Solve { file: PathBuf },
    /// Characteristic matrix, singular values, rank, defect numbers and index.
    Analyze { file: PathBuf },
    /// Check the convergence hypotheses of an ε-family and sweep the error.
    Sweep { file: PathBuf },
    /// Compare the superposition solver against the finite-difference oracle.
    OracleCompare { file: PathBuf },
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let file = match &cli.command {
        Command::Solve { file }
        | Command::Analyze { file }
        | Command::Sweep { file }
        | Command::OracleCompare { file } => file,
    };
    let mut problem = Problem::load(file)?;
    if let Some(nodes) = cli.nodes {
        problem.numerics.nodes = nodes;
    }
    if let Some(substeps) = cli.substeps {
        problem.numerics.ivp.substeps_per_cell = substeps;
    }
    if let Some(tol) = cli.rank_tol {
        problem.numerics.rank_rel_tol = tol;
    }
    let settings = Settings {
        eps: cli.eps,
        eps_grid: cli.eps_grid,
        layers: cli.layers,
        threshold: cli.threshold,
        output: cli.output,
        format: cli.format,
    };
    match cli.command {
        Command::Solve { .. } => commands::cmd_solve(&problem, &settings),
        Command::Analyze { .. } => commands::cmd_analyze(&problem, &settings),
        Command::Sweep { .. } => commands::cmd_sweep(&problem, &settings),
        Command::OracleCompare { .. } => commands::cmd_oracle_compare(&problem, &settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
