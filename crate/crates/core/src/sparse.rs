//! Reweighted-l1 minimization of the total consumed power on one band.
//!
//! The number of active antennas is replaced by `sum_i s_i P_i` with weights
//! `s_i = 1/(P_i + delta)` refreshed after every pass. Each pass is the
//! weighted problem of [`crate::qos`] with diagonal loading `c1 * diag(s)`.
//! Antennas are never removed explicitly: a large weight drives their power
//! towards zero through the loading alone.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    active_set, antenna_powers, validate, BeamformerSolution, ChannelSet, CVector, Diagnostics,
    DualState, IterationRecord, PowerModel, QosTargets, C64,
};
use crate::qos::{solve_weighted_with, DiagLoad, FixedPointOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ReweightOptions {
    /// Start each pass's dual fixed point from the previous pass's duals.
    pub warm_start: bool,
    /// Re-solve on the final active set without the sparsity loading.
    pub polish: bool,
    pub fixed_point: FixedPointOptions,
}

impl Default for ReweightOptions {
    fn default() -> Self {
        Self {
            warm_start: true,
            polish: false,
            fixed_point: FixedPointOptions::default(),
        }
    }
}

/// Weights and history of the reweighting loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ReweightState {
    pub s: Vec<f64>,
    pub iteration: usize,
    pub history: Vec<IterationRecord>,
}

impl ReweightState {
    pub fn new(n_antennas: usize) -> Self {
        Self {
            s: vec![1.0; n_antennas],
            iteration: 0,
            history: Vec::new(),
        }
    }

    /// The sparsity duals `lambda = c1 * s`.
    pub fn lambda(&self, c1: f64) -> Vec<f64> {
        self.s.iter().map(|s| c1 * s).collect()
    }
}

/// `s_i = 1 / (P_i + delta)`.
pub fn reweight(p_antenna: &[f64], delta: f64) -> Vec<f64> {
    p_antenna.iter().map(|p| 1.0 / (p + delta)).collect()
}

/// `c1 * sum_i log(P_i + delta) + c2 * transmit_power`, the concave objective
/// majorized by each reweighted pass.
pub fn surrogate_objective(p_antenna: &[f64], pm: &PowerModel) -> f64 {
    let log_sum: f64 = p_antenna.iter().map(|p| (p + pm.delta).ln()).sum();
    let tx: f64 = p_antenna.iter().sum();
    pm.c1 * log_sum + pm.c2 * tx
}

/// Result of one inner solve at a fixed sparsity loading.
pub(crate) struct InnerSolve {
    pub w: Vec<Vec<CVector>>,
    pub nu: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub fixed_point_iters: usize,
    pub fixed_point_residual: f64,
    pub inner_iters: usize,
}

/// Solves every band independently under a shared diagonal loading.
///
/// Bands run concurrently; results are collected in band order.
pub(crate) fn solve_bands(
    channels: &ChannelSet,
    qos: &[QosTargets],
    c2: f64,
    load: &DiagLoad,
    fp: &FixedPointOptions,
    warm: Option<&[Vec<f64>]>,
) -> Result<InnerSolve> {
    let nb = channels.n_bands();
    let solve = |j: usize| {
        solve_weighted_with(channels.band(j), &qos[j], c2, load, fp, warm.map(|w| w[j].as_slice()))
            .map_err(|e| {
                if nb > 1 {
                    Error::Band {
                        band: j,
                        source: Box::new(e),
                    }
                } else {
                    e
                }
            })
    };
    let per_band: Vec<_> = if nb > 1 {
        (0..nb).into_par_iter().map(solve).collect::<Result<_>>()?
    } else {
        vec![solve(0)?]
    };

    let mut out = InnerSolve {
        w: Vec::with_capacity(nb),
        nu: Vec::with_capacity(nb),
        q: vec![0.0; load.len()],
        fixed_point_iters: 0,
        fixed_point_residual: 0.0,
        inner_iters: 0,
    };
    for sol in per_band {
        out.fixed_point_iters += sol.fixed_point_iters;
        out.fixed_point_residual = out.fixed_point_residual.max(sol.fixed_point_residual);
        out.w.push(sol.w);
        out.nu.push(sol.nu);
    }
    Ok(out)
}

/// The outer reweighting loop shared by the narrowband, capped and
/// multi-band solvers. `inner` solves the weighted problem for a given
/// sparsity loading `lambda`, optionally warm-started from the previous duals.
pub(crate) fn reweighted_loop<F>(
    channels: &ChannelSet,
    qos: &[QosTargets],
    pm: &PowerModel,
    opts: &ReweightOptions,
    mut inner: F,
) -> Result<BeamformerSolution>
where
    F: FnMut(&DiagLoad, Option<&[Vec<f64>]>) -> Result<InnerSolve>,
{
    validate(channels, qos, pm)?;
    let nt = channels.n_antennas();
    let mut state = ReweightState::new(nt);
    let mut diagnostics = Diagnostics::default();
    let mut last: Option<(InnerSolve, Vec<f64>)> = None;

    for _ in 0..pm.outer_iters {
        let lambda = state.lambda(pm.c1);
        let load = DiagLoad::new(lambda.clone())?;
        let warm = match (&last, opts.warm_start) {
            (Some((prev, _)), true) => Some(prev.nu.as_slice()),
            _ => None,
        };
        let sol = inner(&load, warm)?;
        diagnostics.fixed_point_iters += sol.fixed_point_iters;
        diagnostics.inner_iters += sol.inner_iters;
        diagnostics.fixed_point_residual = sol.fixed_point_residual;

        let p = antenna_powers(&sol.w, nt);
        state.history.push(IterationRecord {
            transmit_power: p.iter().sum(),
            n_active: active_set(&p, pm.eps_off).len(),
            surrogate: surrogate_objective(&p, pm),
        });
        state.iteration += 1;
        // Keep the weights that produced this iterate; they are reported as
        // the sparsity duals of the returned solution.
        let next_s = reweight(&p, pm.delta);
        last = Some((sol, std::mem::replace(&mut state.s, next_s)));
    }

    let (sol, s_used) = last.expect("outer_iters >= 1 is validated");
    diagnostics.outer_iters = state.iteration;
    diagnostics.history = state.history;

    let duals = DualState {
        nu: sol.nu,
        lambda: s_used.iter().map(|s| pm.c1 * s).collect(),
        q: sol.q,
    };
    let mut w = sol.w;
    if opts.polish {
        w = polish(channels, qos, pm, &w, &opts.fixed_point)?;
    }
    Ok(BeamformerSolution::assemble(w, channels, qos, pm, duals, diagnostics))
}

/// Re-optimizes the beamformers on the active antennas with no sparsity
/// loading, leaving the inactive antennas at exactly zero.
fn polish(
    channels: &ChannelSet,
    qos: &[QosTargets],
    pm: &PowerModel,
    w: &[Vec<CVector>],
    fp: &FixedPointOptions,
) -> Result<Vec<Vec<CVector>>> {
    let nt = channels.n_antennas();
    let active = active_set(&antenna_powers(w, nt), pm.eps_off);
    if active.len() < channels.n_users() {
        return Ok(w.to_vec());
    }
    let sub = channels.select_antennas(&active)?;
    let sol = solve_bands(&sub, qos, pm.c2, &DiagLoad::zeros(active.len()), fp, None)?;
    Ok(sol
        .w
        .into_iter()
        .map(|band| band.iter().map(|wk| scatter(wk, &active, nt)).collect())
        .collect())
}

/// Expands a beamformer defined on `rows` to all `nt` antennas.
pub(crate) fn scatter(w: &CVector, rows: &[usize], nt: usize) -> CVector {
    let mut full = CVector::from_element(nt, C64::new(0.0, 0.0));
    for (&i, z) in rows.iter().zip(w.iter()) {
        full[i] = *z;
    }
    full
}

/// Minimizes circuit plus transmit power on a single band with the
/// default options.
pub fn solve_total_power_narrowband(
    channels: &ChannelSet,
    qos: &QosTargets,
    pm: &PowerModel,
) -> Result<BeamformerSolution> {
    solve_total_power_narrowband_with(channels, qos, pm, &ReweightOptions::default())
}

pub fn solve_total_power_narrowband_with(
    channels: &ChannelSet,
    qos: &QosTargets,
    pm: &PowerModel,
    opts: &ReweightOptions,
) -> Result<BeamformerSolution> {
    if channels.n_bands() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "narrowband solver given {} bands",
            channels.n_bands()
        )));
    }
    let qos = std::slice::from_ref(qos);
    reweighted_loop(channels, qos, pm, opts, |load, warm| {
        solve_bands(channels, qos, pm.c2, load, &opts.fixed_point, warm)
    })
}
