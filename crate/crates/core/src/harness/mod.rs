//! Seeded Monte-Carlo sweeps over antenna and band counts.
//!
//! A sweep is the cross product of trials, `nt_list`, `nb_list` and methods.
//! Every (trial, N_t, N_b) unit draws its channels from a seed derived from
//! the experiment seed and the trial index, so any unit can be rerun in
//! isolation and the output does not depend on how units are scheduled
//! across threads.

pub mod channels;
pub mod config;

use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{greedy_antenna_selection, solve_naive};
use crate::error::{Error, Result};
use crate::model::{BeamformerSolution, ChannelSet};
use crate::multiband::{solve_total_power_multiband, MultibandProblem};
use crate::papc::solve_total_power_papc;
use crate::sparse::solve_total_power_narrowband;

pub use channels::{derive_seed, generate_channels};
pub use config::{ExperimentConfig, Method, PapcConfig, Preset};

/// One row of the experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: String,
    pub trial: usize,
    pub seed: u64,
    pub nt: usize,
    pub k: usize,
    pub nb: usize,
    pub method: Method,
    pub feasible: bool,
    pub transmit_power: f64,
    pub n_active: usize,
    pub total_power: f64,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub wall_ms: f64,
    /// Solver error for rows that did not produce a solution.
    pub error: Option<String>,
}

pub const CSV_HEADER: &str =
    "experiment,trial,seed,nt,k,nb,method,feasible,transmit_power_w,n_active,total_power_w,outer_iters,inner_iters,wall_ms";

/// Nine significant digits.
fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.trial,
            self.seed,
            self.nt,
            self.k,
            self.nb,
            self.method,
            self.feasible,
            fmt_float(self.transmit_power),
            self.n_active,
            fmt_float(self.total_power),
            self.outer_iters,
            self.inner_iters,
            fmt_float(self.wall_ms),
        )
    }
}

pub fn write_csv<W: Write>(records: &[TrialRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn to_csv_string(records: &[TrialRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

fn solve(method: Method, channels: &ChannelSet, cfg: &ExperimentConfig) -> Result<BeamformerSolution> {
    let pm = cfg.power_model();
    let qos = cfg.qos();
    match method {
        Method::Naive => solve_naive(channels, &vec![qos; channels.n_bands()], &pm),
        Method::Alg1 => solve_total_power_narrowband(channels, &qos, &pm),
        Method::Alg2 => solve_total_power_papc(channels, &qos, &pm, &cfg.schedule()),
        Method::Greedy => greedy_antenna_selection(channels, &qos, &pm),
        Method::Multiband => {
            let prob = MultibandProblem::new(channels.clone(), vec![qos; channels.n_bands()], pm)?;
            solve_total_power_multiband(&prob)
        }
    }
}

/// Runs every method on one channel realization.
fn run_unit(cfg: &ExperimentConfig, trial: usize, nt: usize, nb: usize) -> Vec<TrialRecord> {
    let seed = derive_seed(cfg.seed, trial);
    let channels = generate_channels(seed, nt, cfg.k, nb);
    cfg.methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let result = solve(method, &channels, cfg);
            let wall_ms = if cfg.timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            let mut rec = TrialRecord {
                experiment: cfg.experiment.clone(),
                trial,
                seed,
                nt,
                k: cfg.k,
                nb,
                method,
                feasible: false,
                transmit_power: f64::NAN,
                n_active: 0,
                total_power: f64::NAN,
                outer_iters: 0,
                inner_iters: 0,
                wall_ms,
                error: None,
            };
            match result {
                Ok(sol) => {
                    rec.feasible = sol.feasible;
                    rec.transmit_power = sol.transmit_power;
                    rec.n_active = sol.n_active;
                    rec.total_power = sol.total_power;
                    rec.outer_iters = sol.diagnostics.outer_iters;
                    rec.inner_iters = sol.diagnostics.inner_iters;
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec
        })
        .collect()
}

/// Runs the sweep on the global thread pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let units: Vec<(usize, usize, usize)> = (0..cfg.trials)
        .flat_map(|t| {
            cfg.nt_list
                .iter()
                .flat_map(move |&nt| cfg.nb_list.iter().map(move |&nb| (t, nt, nb)))
        })
        .collect();
    let mut records: Vec<TrialRecord> = units
        .into_par_iter()
        .flat_map_iter(|(t, nt, nb)| run_unit(cfg, t, nt, nb))
        .collect();
    records.sort_by_key(|r| (r.nt, r.nb, r.method, r.trial));
    Ok(records)
}

/// Runs the sweep on a dedicated pool of `threads` workers.
pub fn run_experiment_parallel(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<TrialRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}

/// Per-point averages over feasible trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub nt: usize,
    pub nb: usize,
    pub method: Method,
    pub trials: usize,
    pub feasible: usize,
    pub mean_n_active: f64,
    pub mean_transmit_power: f64,
    pub mean_total_power: f64,
}

/// Aggregates records by (N_t, N_b, method). Infeasible rows are counted
/// but excluded from the means.
pub fn summarize(records: &[TrialRecord]) -> Vec<Summary> {
    let mut out: Vec<Summary> = Vec::new();
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.nt, r.nb, r.method, r.trial));
    for r in sorted {
        let same = out
            .last()
            .is_some_and(|s| (s.nt, s.nb, s.method) == (r.nt, r.nb, r.method));
        if !same {
            out.push(Summary {
                nt: r.nt,
                nb: r.nb,
                method: r.method,
                trials: 0,
                feasible: 0,
                mean_n_active: 0.0,
                mean_transmit_power: 0.0,
                mean_total_power: 0.0,
            });
        }
        let s = out.last_mut().expect("pushed above");
        s.trials += 1;
        if r.feasible {
            s.feasible += 1;
            s.mean_n_active += r.n_active as f64;
            s.mean_transmit_power += r.transmit_power;
            s.mean_total_power += r.total_power;
        }
    }
    for s in &mut out {
        let n = s.feasible as f64;
        if s.feasible > 0 {
            s.mean_n_active /= n;
            s.mean_transmit_power /= n;
            s.mean_total_power /= n;
        } else {
            s.mean_n_active = f64::NAN;
            s.mean_transmit_power = f64::NAN;
            s.mean_total_power = f64::NAN;
        }
    }
    out
}

/// Plain-text table of a summary, one line per point.
pub fn format_summary(summary: &[Summary]) -> String {
    let mut s = format!(
        "{:>4} {:>4} {:>10} {:>7} {:>9} {:>10} {:>10}\n",
        "nt", "nb", "method", "trials", "feasible", "n_active", "total_w"
    );
    for row in summary {
        s.push_str(&format!(
            "{:>4} {:>4} {:>10} {:>7} {:>9} {:>10.3} {:>10.4}\n",
            row.nt,
            row.nb,
            row.method,
            row.trials,
            row.feasible,
            row.mean_n_active,
            row.mean_total_power
        ));
    }
    s
}
