//! `chainbounds`: bounds, x-scans, simulations and maximal-chain checks.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure.

mod commands;
mod output;

use std::io::{self, IsTerminal, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chainbounds::harness::{Algorithm, DEFAULT_LOWER_FRACTION};
use chainbounds::Error;

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "chainbounds",
    version,
    about = "Longest-chain bounds for random points in the unit hypercube"
)]
struct Cli {
    /// Emit one JSON object per line.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV with 17 significant digits.
    #[arg(long, global = true)]
    csv: bool,
    /// Master seed for random experiments.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads, 0 picks the number of cores.
    #[arg(long, global = true, env = "CHAINBOUNDS_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lower bound and the upper-bound constant for one dimension.
    Bounds(BoundsArgs),
    /// Tabulate a, b, u, q and the growth factor over a range of x.
    Scan(ScanArgs),
    /// Monte Carlo longest-chain lengths scaled by n^(1/t).
    Simulate(SimulateArgs),
    /// Compare counting and integral estimates of the expected number of maximal chains.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Absolute residual tolerance for every root.
    #[arg(long, default_value_t = 1e-10)]
    root_tol: f64,
    /// Iteration cap for bracketing and bisection.
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Points in the x grid scanned for the first crossing.
    #[arg(long, default_value_t = 4096)]
    grid_points: usize,
    /// Factor by which root brackets are widened.
    #[arg(long, default_value_t = 2.0)]
    bracket_growth: f64,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Dimension t of the hypercube.
    #[arg(long = "dim")]
    t: u32,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Dimension t of the hypercube.
    #[arg(long = "dim")]
    t: u32,
    /// Defaults to e^-gamma.
    #[arg(long)]
    x_min: Option<f64>,
    /// Defaults to e.
    #[arg(long)]
    x_max: Option<f64>,
    /// Number of x values, endpoints included.
    #[arg(long, default_value_t = 64)]
    steps: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Dimension t of the hypercube.
    #[arg(long = "dim")]
    t: usize,
    /// Number of uniform points n.
    #[arg(long = "points")]
    n: usize,
    /// Independent replications.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// auto, quadratic or patience.
    #[arg(long, default_value = "auto", value_parser = parse_algorithm)]
    algo: Algorithm,
    /// Compare against the bound band.
    #[arg(long)]
    check_bounds: bool,
    /// Stream one JSON line per replication.
    #[arg(long)]
    per_rep: bool,
    /// The mean ratio must exceed this fraction of the lower bound.
    #[arg(long, default_value_t = DEFAULT_LOWER_FRACTION)]
    lower_fraction: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Dimension t of the hypercube.
    #[arg(long = "dim")]
    t: usize,
    /// Number of uniform points n.
    #[arg(long = "points")]
    n: usize,
    /// Chain length.
    #[arg(long)]
    ell: usize,
    /// Replications on each side.
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of a subcommand, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Argument(_) | Error::SizeGuard(_) => {
                Failure::Usage(e.to_string())
            }
            Error::Numerical(_) | Error::Contradiction(_) => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Human
    };
    let progress = io::stderr().is_terminal();

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.threads);
            return ExitCode::from(2);
        }
    };

    let mut out = io::BufWriter::new(io::stdout());
    let result = pool.install(|| match &cli.command {
        Command::Bounds(a) => commands::bounds(a.t, solver_config(&a.solver), format, &mut out),
        Command::Scan(a) => commands::scan(
            commands::ScanRequest {
                t: a.t,
                x_min: a.x_min,
                x_max: a.x_max,
                steps: a.steps,
                cfg: solver_config(&a.solver),
            },
            format,
            &mut out,
        ),
        Command::Simulate(a) => commands::simulate(
            commands::SimulateRequest {
                t: a.t,
                n: a.n,
                reps: a.reps,
                seed: cli.seed,
                algorithm: a.algo,
                check_bounds: a.check_bounds,
                per_rep: a.per_rep,
                lower_fraction: a.lower_fraction,
                progress,
            },
            format,
            &mut out,
        ),
        Command::Verify(a) => commands::verify(a.t, a.n, a.ell, a.reps, cli.seed, format, &mut out),
    });
    let result = result.and_then(|()| out.flush().map_err(Failure::from));

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn solver_config(a: &SolverArgs) -> chainbounds::bounds::SolverConfig {
    chainbounds::bounds::SolverConfig {
        root_tol: a.root_tol,
        max_iter: a.max_iter,
        x_grid_points: a.grid_points,
        bracket_growth: a.bracket_growth,
    }
}
