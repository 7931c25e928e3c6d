use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nhsense::harness::{self, ExperimentConfig, HarnessError, RunOptions};

#[derive(Parser)]
#[command(name = "nhsense", version, about = "Hermitian vs non-Hermitian sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV, SVG and a manifest.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides NHSENSE_OUTPUT_DIR and the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for Monte-Carlo replications.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Report every violated invariant of a config without running it.
    Validate { config: PathBuf },
    /// List registered experiments.
    ListExperiments,
}

fn fail(err: &HarnessError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for e in harness::experiments::registry() {
                println!("{:<18} {}", e.name(), e.description());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(m) => return fail(&HarnessError::Config(m)),
            };
            let violations = harness::validate(&cfg);
            let report = serde_json::json!({ "experiment": cfg.experiment, "violations": violations });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Run {
            config,
            seed,
            out,
            workers,
        } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(m) => return fail(&HarnessError::Config(m)),
            };
            match harness::run(&cfg, &RunOptions { seed, out, workers }) {
                Ok((manifest, dir)) => {
                    for f in &manifest.files {
                        println!("{}", dir.join(&f.path).display());
                    }
                    println!("{}", dir.join("manifest.json").display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}
