use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uniloc::experiment::{compare, run, ExperimentConfig, OUT_DIR_ENV};
use uniloc::Error;

#[derive(Parser)]
#[command(name = "uniloc", version, about = "Random unitary band operators: experiments and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Run an experiment and write its artifacts.
    Run {
        config: PathBuf,
        /// Output directory (defaults to the config's `output_dir`, then
        /// $UNILOC_OUT_DIR, then ./uniloc-out).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare two artifact directories.
    Compare { a: PathBuf, b: PathBuf },
}

fn report(e: &Error) -> ExitCode {
    match e {
        Error::Validation(errs) => {
            for f in errs {
                eprintln!("error: {f}");
            }
            ExitCode::from(1)
        }
        e => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(cfg) => match cfg.validate() {
                Ok(()) => {
                    println!("ok");
                    ExitCode::SUCCESS
                }
                Err(errs) => report(&Error::Validation(errs)),
            },
            Err(Error::Io(e)) => report(&Error::Validation(vec![uniloc::error::FieldError::new(
                config.display().to_string(),
                e.to_string(),
            )])),
            Err(e) => report(&e),
        },
        Command::Run { config, out, threads } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e @ Error::Validation(_)) => return report(&e),
                Err(e) => return report(&Error::Validation(vec![uniloc::error::FieldError::new(
                    config.display().to_string(),
                    e.to_string(),
                )])),
            };
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("uniloc-out"));
            match run(&cfg, &dir, threads) {
                Ok(o) => {
                    println!("{}", serde_json::to_string_pretty(&o.summary).expect("summary serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => report(&e),
            }
        }
        Command::Compare { a, b } => match compare(&a, &b) {
            Ok(r) => {
                println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
                ExitCode::SUCCESS
            }
            Err(e) => report(&e),
        },
    }
}
