use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beamforming::harness::{
    format_summary, run_experiment, run_experiment_parallel, summarize, write_csv, ExperimentConfig, Preset,
};

/// Monte-Carlo runner for total-power-minimizing beamforming.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a `key = value` config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run one of the standard sweeps: fig1, fig2, table1 or table2.
    Reproduce {
        target: Preset,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    parallel: Option<usize>,
    /// Record wall-clock time per row (makes the output non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn execute(mut cfg: ExperimentConfig, common: Common) -> Result<(), Box<dyn std::error::Error>> {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    cfg.timing |= common.timing;
    cfg.validate()?;

    let records = match common.parallel {
        Some(n) => run_experiment_parallel(&cfg, n)?,
        None => run_experiment(&cfg)?,
    };
    match &common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_csv(&records, &mut w)?;
            w.flush()?;
        }
        None => write_csv(&records, io::stdout().lock())?,
    }
    eprint!("{}", format_summary(&summarize(&records)));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, common } => {
            ExperimentConfig::from_path(&config).map_err(Into::into).and_then(|cfg| execute(cfg, common))
        }
        Command::Reproduce { target, common } => execute(target.config(), common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
