//! Command-line front end: `run`, `batch`, `baseline` and `verify`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error,
//! 3 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dfplay::harness::{
    centralized_baseline, emit_run, emit_summary, load_scenario, run_batch, run_single, verify_game, BuiltGame, Format,
    Scenario,
};
use dfplay::{BeautyContest, Error, TargetCover};

#[derive(Parser)]
#[command(name = "dfplay", version, about = "Distributed fictitious play experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trajectory.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
    },
    /// Run one trajectory per seed and write a summary.
    Batch {
        #[arg(long)]
        scenario: PathBuf,
        /// Seed range `N..M`, end exclusive.
        #[arg(long)]
        seeds: String,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Centralized assignment for a covering scenario.
    Baseline {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Symmetry, potential and oracle checks; both bundled games when no
    /// scenario is given.
    Verify {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Parse { .. } => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, Failure> {
    let bad = || Failure::Config(format!("--seeds expects N..M, got `{text}`"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a >= b {
        return Err(Failure::Config(format!("--seeds range `{text}` is empty")));
    }
    Ok((a..b).collect())
}

fn load(path: &PathBuf, horizon: Option<usize>) -> Result<Scenario, Failure> {
    let scenario = load_scenario(path)?;
    for w in scenario.warnings()? {
        eprintln!("warning: {w}");
    }
    let scenario = match horizon {
        Some(h) => scenario.with_horizon(h),
        None => scenario,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { scenario, seed, horizon, out, format } => {
            let scenario = load(&scenario, horizon)?;
            let output = run_single(&scenario, seed)?;
            let format = match format {
                OutFormat::Csv => Format::Csv,
                OutFormat::Json => Format::Json,
            };
            for path in emit_run(&output, format, &out)? {
                println!("wrote {}", path.display());
            }
            println!("termination: {}", serde_json::to_string(&output.trajectory.termination).unwrap_or_default());
        }
        Command::Batch { scenario, seeds, parallel, horizon, out } => {
            let seeds = parse_seeds(&seeds)?;
            let scenario = load(&scenario, horizon)?;
            let summary = run_batch(&scenario, &seeds, parallel)?;
            let path = emit_summary(&summary, &out)?;
            println!(
                "{} runs: {} converged, {} at horizon, {} errors; mean convergence {:?}",
                summary.runs.len(),
                summary.converged,
                summary.failures,
                summary.errors,
                summary.mean_convergence
            );
            println!("wrote {}", path.display());
        }
        Command::Baseline { scenario, seed } => {
            let mut scenario = load(&scenario, None)?;
            if let Some(s) = seed {
                scenario = scenario.with_seed(s);
            }
            let b = centralized_baseline(&scenario)?;
            println!("{}", serde_json::to_string_pretty(&b).map_err(|e| Failure::Runtime(e.to_string()))?);
        }
        Command::Verify { scenario, seed, samples } => {
            let games = match scenario {
                Some(path) => vec![(path.display().to_string(), load(&path, None)?.build_game()?)],
                None => vec![
                    (
                        "beauty contest".to_string(),
                        BuiltGame::Beauty(BeautyContest::new(50, 0.5, BeautyContest::degree_grid())?),
                    ),
                    ("target covering".to_string(), BuiltGame::Cover(TargetCover::reference_instance())),
                ],
            };
            let mut ok = true;
            for (name, game) in games {
                let report = verify_game(&game, samples, seed)?;
                for c in &report.checks {
                    println!("{} {name}: {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                }
                ok &= report.passed();
            }
            if !ok {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(3)
        }
    }
}
