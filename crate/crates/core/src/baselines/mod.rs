//! Reference solvers the sparse methods are compared against.
//!
//! * [`solve_qos_min_power`]: minimum transmit power under SINR targets, all
//!   antennas on.
//! * [`solve_qos_papc`]: the same with per-antenna power caps.
//! * [`greedy_antenna_selection`]: deletes the weaker of the two most
//!   correlated antenna rows one at a time, re-solving the transmit power
//!   problem after each deletion, and keeps the subset with the lowest total
//!   power.
//!
//! The `oracle` feature adds an independent conic solver for cross-checks.

#[cfg(feature = "oracle")]
pub mod oracle;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{
    validate, BeamformerSolution, ChannelSet, CVector, Diagnostics, DualState, PowerModel, QosTargets, C64,
};
use crate::papc::{capped_solve, CappedSolve, SubgradientSchedule};
use crate::qos::{solve_weighted, DiagLoad, FixedPointOptions, WeightedSolution};
use crate::sparse::scatter;

/// Minimum transmit power beamformers meeting the SINR targets.
pub fn solve_qos_min_power(h: &[CVector], qos: &QosTargets) -> Result<WeightedSolution> {
    let n = h.first().map_or(0, |v| v.len());
    solve_weighted(h, qos, 1.0, &DiagLoad::zeros(n))
}

/// Minimum transmit power with every antenna capped at `p_a`.
pub fn solve_qos_papc(
    h: &[CVector],
    qos: &QosTargets,
    p_a: f64,
    sched: &SubgradientSchedule,
) -> Result<CappedSolve> {
    if !(p_a > 0.0) {
        return Err(Error::InvalidPowerModel(format!("p_a must be > 0, got {p_a}")));
    }
    let n = h.first().map_or(0, |v| v.len());
    capped_solve(
        h,
        qos,
        1.0,
        &vec![0.0; n],
        p_a,
        sched,
        vec![0.0; n],
        None,
        &FixedPointOptions::default(),
    )
}

/// The conventional design evaluated under a power model: minimum transmit
/// power on every band with all antennas on.
pub fn solve_naive(channels: &ChannelSet, qos: &[QosTargets], pm: &PowerModel) -> Result<BeamformerSolution> {
    validate(channels, qos, pm)?;
    let mut w = Vec::with_capacity(channels.n_bands());
    let mut duals = DualState {
        lambda: vec![0.0; channels.n_antennas()],
        q: vec![0.0; channels.n_antennas()],
        ..Default::default()
    };
    let mut diagnostics = Diagnostics::default();
    for (j, t) in qos.iter().enumerate() {
        let sol = solve_qos_min_power(channels.band(j), t)?;
        diagnostics.fixed_point_iters += sol.fixed_point_iters;
        diagnostics.fixed_point_residual = diagnostics.fixed_point_residual.max(sol.fixed_point_residual);
        w.push(sol.w);
        duals.nu.push(sol.nu);
    }
    diagnostics.outer_iters = 1;
    Ok(BeamformerSolution::assemble(w, channels, qos, pm, duals, diagnostics))
}

/// `|<r_a, r_b>| / (|r_a| |r_b|)` for the rows of the antenna-by-user channel
/// matrix, together with the row powers `|r_i|^2`.
fn row_correlations(h: &[CVector]) -> (DMatrix<f64>, Vec<f64>) {
    let nt = h[0].len();
    let gram = DMatrix::from_fn(nt, nt, |a, b| {
        h.iter().map(|hk| hk[a].conj() * hk[b]).sum::<C64>()
    });
    let power: Vec<f64> = (0..nt).map(|i| gram[(i, i)].re).collect();
    let corr = DMatrix::from_fn(nt, nt, |a, b| {
        let denom = (power[a] * power[b]).sqrt();
        if denom > 0.0 {
            gram[(a, b)].norm() / denom
        } else {
            0.0
        }
    });
    (corr, power)
}

/// Picks the row to delete: the lower-power row of the most correlated pair.
/// Ties on correlation go to the lexicographically first pair; ties on power
/// delete the later row.
pub(crate) fn row_to_delete(rows: &[usize], corr: &DMatrix<f64>, power: &[f64]) -> Option<usize> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (ia, &a) in rows.iter().enumerate() {
        for &b in &rows[ia + 1..] {
            let c = corr[(a, b)];
            if best.is_none_or(|(bc, _, _)| c > bc) {
                best = Some((c, a, b));
            }
        }
    }
    best.map(|(_, a, b)| if power[a] < power[b] { a } else { b })
}

/// Correlation-based greedy antenna deletion followed by minimum transmit
/// power beamforming on the surviving antennas.
pub fn greedy_antenna_selection(
    channels: &ChannelSet,
    qos: &QosTargets,
    pm: &PowerModel,
) -> Result<BeamformerSolution> {
    let qos_slice = std::slice::from_ref(qos);
    validate(channels, qos_slice, pm)?;
    if channels.n_bands() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "greedy selection works on a single band, got {} bands",
            channels.n_bands()
        )));
    }
    let nt = channels.n_antennas();
    let k = channels.n_users();
    if nt <= k {
        return Err(Error::DimensionMismatch(format!(
            "greedy selection needs more antennas than users, got {nt} antennas for {k} users"
        )));
    }
    let (corr, power) = row_correlations(channels.band(0));
    let mut rows: Vec<usize> = (0..nt).collect();
    let mut best: Option<BeamformerSolution> = None;
    let mut evaluated = 0;
    let mut fixed_point_iters = 0;

    loop {
        let sub = channels.select_antennas(&rows)?;
        let sol = solve_qos_min_power(sub.band(0), qos)?;
        evaluated += 1;
        fixed_point_iters += sol.fixed_point_iters;
        let w = vec![sol.w.iter().map(|wk| scatter(wk, &rows, nt)).collect()];
        let duals = DualState {
            nu: vec![sol.nu],
            lambda: vec![0.0; nt],
            q: vec![0.0; nt],
        };
        let diagnostics = Diagnostics {
            fixed_point_residual: sol.fixed_point_residual,
            ..Default::default()
        };
        let candidate = BeamformerSolution::assemble(w, channels, qos_slice, pm, duals, diagnostics);
        if best.as_ref().is_none_or(|b| candidate.total_power < b.total_power) {
            best = Some(candidate);
        }
        if rows.len() == k {
            break;
        }
        let drop = row_to_delete(&rows, &corr, &power).expect("at least two rows remain");
        rows.retain(|&r| r != drop);
    }

    let mut best = best.expect("at least one subset is evaluated");
    best.diagnostics.outer_iters = evaluated;
    best.diagnostics.fixed_point_iters = fixed_point_iters;
    Ok(best)
}
