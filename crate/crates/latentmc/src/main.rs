use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use latentmc::check::run_checks;
use latentmc::config::{ExperimentConfig, Method};
use latentmc::experiment::{build_problem, render_report, run_experiment, write_problem_data};

#[derive(Parser)]
#[command(name = "sampler", version, about = "Auto-encoded HMC and pCN samplers with their baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write traces, summaries and a report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run only this method (its baseline still provides warm-up draws).
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        no_volume_correction: bool,
    },
    /// Write the experiment's dataset files without sampling.
    SynthData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Check,
}

fn load(config: &PathBuf, out: Option<PathBuf>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    Ok(cfg)
}

fn main() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            method,
            no_volume_correction,
        } => {
            let mut cfg = load(&config, out)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(m) = method {
                cfg.methods = Some(vec![m]);
            }
            if no_volume_correction {
                cfg.sampler.volume_correction = Some(false);
            }
            let outcome = run_experiment(&cfg).with_context(|| format!("experiment from {}", config.display()))?;
            print!("{}", render_report(&outcome.report));
            println!("artifacts in {}", cfg.output_dir.display());
        }
        Command::SynthData { config, out } => {
            let cfg = load(&config, out)?;
            let problem = build_problem(&cfg)?;
            let written = write_problem_data(&problem, &cfg.output_dir)?;
            if written.is_empty() {
                println!("the {:?} experiment has no data files", cfg.experiment);
            }
            for p in written {
                println!("wrote {}", p.display());
            }
        }
        Command::Check => {
            let results = run_checks();
            let mut ok = true;
            for r in &results {
                println!("{} {} ({})", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                ok &= r.passed;
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    }
    Ok(ExitCode::SUCCESS)
}
