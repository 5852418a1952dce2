use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mlpf_cli::{parse_problem, run_command, CliError, Command, Flags, EXIT_VERIFY_FAILED};

const AFTER_HELP: &str = "\
Problem and report files are TOML with `format = 1`. Indices inside files are
0-based.

Exit status:
  0  success
  2  usage error
  3  problem or candidate file failed to parse or validate
  4  precondition failed (e.g. a vanishing tensor slice)
  5  map di-graph is not primitive (see --allow-nonprimitive)
  6  map is not monotone; use `search`
  7  no convergence within --max-iter iterations
  8  verification ran and at least one candidate failed
  9  file could not be read or written";

#[derive(Parser)]
#[command(
    name = "mlpf",
    version,
    about = "Positive eigenvectors of nonnegative multilinear forms and polynomial maps",
    after_help = AFTER_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Irreducibility and primitivity verdicts
    Check(Common),
    /// Normalized power algorithm (monotone maps only)
    Solve(Common),
    /// Multi-start search for all positive solutions it can reach
    Search(Common),
    /// Linearization at the eigenvector and convergence rate
    Rate(Common),
    /// Check candidate solutions against the raw system
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Problem file
    problem: PathBuf,
    /// Norm exponents: one value, or one per mode (comma-separated)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    p: Option<Vec<f64>>,
    /// Strictly positive normalizing functional (comma-separated)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    psi: Option<Vec<f64>>,
    /// Convergence tolerance; for `verify`, the residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random starts for `search`
    #[arg(long)]
    starts: Option<usize>,
    /// Damping in (0, 1]
    #[arg(long)]
    damping: Option<f64>,
    /// Run the power algorithm on periodic maps
    #[arg(long)]
    allow_nonprimitive: bool,
    /// Candidate file for `verify` (a report or a file with `x = [...]`)
    #[arg(long)]
    candidate: Option<PathBuf>,
    /// Eigenvalue for `verify`; fitted by least squares when omitted
    #[arg(long)]
    lambda: Option<f64>,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (cmd, c) = match cli.command {
        Cmd::Check(c) => (Command::Check, c),
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::Search(c) => (Command::Search, c),
        Cmd::Rate(c) => (Command::Rate, c),
        Cmd::Verify(c) => (Command::Verify, c),
    };
    let flags = Flags {
        p: c.p,
        psi: c.psi,
        tol: c.tol,
        max_iter: c.max_iter,
        seed: c.seed,
        starts: c.starts,
        damping: c.damping,
        allow_nonprimitive: c.allow_nonprimitive,
        candidate: c.candidate,
        lambda: c.lambda,
    };
    let problem = parse_problem(&c.problem)?;
    let report = run_command(cmd, &problem, &flags)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let text = report.to_toml();
    match &c.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?,
        None => print!("{text}"),
    }
    Ok(if report.verification_failed() {
        EXIT_VERIFY_FAILED
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
