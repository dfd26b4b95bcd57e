use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ellinc::inclusion::{DEFAULT_EPS, DEFAULT_TOL};
use ellinc::invariant::SimulationOptions;
use ellinc_cli::bench;
use ellinc_cli::commands::{self, Outcome, TrajectoryRequest};
use ellinc_cli::CliError;

/// Ellipsoid inclusion, minimal scaling, contact points and covering level sets.
#[derive(Parser)]
#[command(name = "ellinc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// JSON input file; `-` or omitted reads stdin.
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether E is contained in E0 (exit 0 inside, 1 outside, 2 touching).
    Check {
        #[command(flatten)]
        input: Input,
        /// Bracket width at which bisection stops.
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Minimal scaling factor of E0 so that E touches it from inside.
    Gamma {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Contact points of a touching pair.
    Contact {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Rescale E0 by its minimal factor first.
        #[arg(long)]
        rescale: bool,
    },
    /// Smallest level set of a template covering several ellipsoids.
    Cover {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Smallest forward-invariant Lyapunov level set of a disturbed system.
    Invariant {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Write a simulated trajectory as CSV to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Initial state, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Hold time of each random disturbance value.
        #[arg(long, default_value_t = 0.1)]
        hold: f64,
    },
    /// Time decide on generated pairs and emit CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "3,10,30,100")]
        dims: Vec<usize>,
        /// Pairs per dimension, split evenly between inside and outside.
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_input(input: &Input) -> Result<String, CliError> {
    let mut text = String::new();
    match input.input.as_deref() {
        None => io::stdin().read_to_string(&mut text)?,
        Some(p) if p == Path::new("-") => io::stdin().read_to_string(&mut text)?,
        Some(p) => File::open(p)?.read_to_string(&mut text)?,
    };
    Ok(text)
}

fn emit(outcome: Outcome) -> Result<i32, CliError> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &outcome.json)?;
    writeln!(stdout)?;
    Ok(outcome.code)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Check { input, eps } => emit(commands::check(&read_input(&input)?, eps)?),
        Command::Gamma { input, tol } => emit(commands::gamma(&read_input(&input)?, tol)?),
        Command::Contact { input, tol, rescale } => {
            emit(commands::contact(&read_input(&input)?, tol, rescale)?)
        }
        Command::Cover { input, tol } => emit(commands::cover_cmd(&read_input(&input)?, tol)?),
        Command::Invariant { input, tol, out, x0, seed, horizon, dt, hold } => {
            let text = read_input(&input)?;
            let request = out.as_ref().map(|_| TrajectoryRequest {
                x0: x0.clone().unwrap_or_else(|| vec![-1.0, -1.0]),
                options: SimulationOptions { horizon, dt, hold, seed },
            });
            let (outcome, report) = commands::invariant(&text, tol, request.as_ref())?;
            if let (Some(path), Some(report)) = (out, report) {
                commands::write_trajectory(File::create(path)?, &report)?;
            }
            emit(outcome)
        }
        Command::Bench { dims, cases, seed, eps, out } => {
            let runs = bench::run(&dims, cases, seed, eps)?;
            let records: Vec<_> = runs.into_iter().map(|r| r.record).collect();
            match out {
                Some(path) => bench::write_csv(File::create(path)?, &records)?,
                None => bench::write_csv(io::stdout().lock(), &records)?,
            }
            for s in bench::summarize(&records) {
                eprintln!(
                    "n={:<4} cases={:<4} median={:>12} ns  mean={:>14.1} ns",
                    s.n, s.cases, s.median_ns, s.mean_ns
                );
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors must not collide with the verdict codes 0..=2.
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("ellinc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
