use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use conefix::harness::{resolve_problem, run, Command, RunOptions, DEFAULT_SEED, EXIT_INPUT};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Check,
    Estimate,
    Solve,
    Verify,
    All,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Check => Command::Check,
            Sub::Estimate => Command::Estimate,
            Sub::Solve => Command::Solve,
            Sub::Verify => Command::Verify,
            Sub::All => Command::All,
        }
    }
}

/// Certified fixed points of T-Kannan and T-Chatterjea contractions on cone
/// metric spaces.
#[derive(Debug, Parser)]
#[command(name = "conefix", version)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    command: Sub,
    /// Problem file (JSON), or the name of a bundled fixture.
    problem: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Override the solver tolerance from the problem file.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the iteration cap from the problem file.
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("conefix: {msg}");
    ExitCode::from(EXIT_INPUT as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let loaded = match resolve_problem(&cli.problem) {
        Ok(l) => l,
        Err(e) => return input_error(e),
    };
    let options = RunOptions {
        seed: cli.seed,
        tol: cli.tol,
        max_iter: cli.max_iter,
        timings: cli.timings,
    };
    let report = match run(&loaded, cli.command.into(), &options) {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    let json = report.to_json();
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            return input_error(format!("cannot write {}: {e}", path.display()));
        }
    }
    println!("{json}");
    eprintln!("{}", report.summary());
    ExitCode::from(report.exit_status() as u8)
}
