use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vav_core::harness::{
    compare_runs, parse_values, run_experiment, selftest, sweep, ExperimentConfig, SweepParam,
};
use vav_core::Error;

/// Default output directory when neither the flag nor the config sets one.
const OUT_DIR_ENV: &str = "VAV_OUT_DIR";

#[derive(Parser)]
#[command(name = "vav", version, about = "Energy-stable adaptive optimizer experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a config once per value of one numeric parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate finished runs against a baseline run.
    Compare {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the invariant suite.
    Selftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<PathBuf>, cfg: Option<&ExperimentConfig>, fallback: &str) -> PathBuf {
    flag.or_else(|| cfg.and_then(|c| c.output_path.clone()))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(fallback)))
        .unwrap_or_else(|| Path::new("runs").join(fallback))
}

enum Failure {
    Error(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn main_inner(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir(out, Some(&cfg), &cfg.display_name());
            let summary = run_experiment(&cfg, &dir)?;
            println!("{}", serde_json::to_string_pretty(&summary).map_err(Error::from)?);
            if summary.audit.hard_failures() > 0 {
                return Err(Failure::Invariant(format!(
                    "{} invariant checks failed; see {}",
                    summary.audit.hard_failures(),
                    dir.display()
                )));
            }
        }
        Command::Sweep { config, param, values, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let param: SweepParam = param.parse()?;
            let values = parse_values(&values)?;
            let dir = out_dir(out, Some(&cfg), &format!("{}-sweep", cfg.display_name()));
            let runs = sweep(&cfg, param, &values, &dir)?;
            let summaries: Vec<_> = runs.iter().map(|(_, s)| s).collect();
            println!("{}", serde_json::to_string_pretty(&summaries).map_err(Error::from)?);
            let bad: u64 = summaries.iter().map(|s| s.audit.hard_failures()).sum();
            if bad > 0 {
                return Err(Failure::Invariant(format!("{bad} invariant checks failed across the sweep")));
            }
        }
        Command::Compare { paths, baseline, json } => {
            let table = compare_runs(&paths, &baseline)?;
            if json {
                println!("{}", table.to_json());
            } else {
                print!("{}", table.to_table());
            }
        }
        Command::Selftest { out } => {
            let dir = out_dir(out, None, "selftest");
            let report = selftest(&dir)?;
            print!("{}", report.to_text());
            if !report.passed() {
                return Err(Failure::Invariant("selftest failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Invariant(_) | Error::Contract(_) | Error::Oracle { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
