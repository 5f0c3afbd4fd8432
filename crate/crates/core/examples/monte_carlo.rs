//! A small seeded Monte-Carlo sweep written as CSV to stdout, with a
//! per-cell summary on stderr.

use std::io;

use beamforming::harness::{format_summary, run_experiment, summarize, write_csv, ExperimentConfig, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig {
        experiment: "demo".into(),
        seed: 2024,
        trials: 20,
        nt_list: vec![8, 16, 24],
        methods: vec![Method::Naive, Method::Alg1, Method::Greedy],
        ..ExperimentConfig::default()
    };
    let records = run_experiment(&cfg)?;
    write_csv(&records, io::stdout().lock())?;
    eprint!("{}", format_summary(&summarize(&records)));
    Ok(())
}
