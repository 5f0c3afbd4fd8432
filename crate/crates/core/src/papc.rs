//! Total power minimization under per-antenna power caps.
//!
//! The cap duals `q_i` enter the loaded covariance next to the sparsity
//! duals, and are found by projected subgradient ascent nested inside every
//! reweighting pass:
//!
//!   q_i <- max(q_i + t_n (P_i - p_a), 0)
//!
//! The inner loop stops once no antenna exceeds the cap and complementary
//! slackness holds approximately.

use crate::error::{Error, Result};
use crate::model::{antenna_powers, BeamformerSolution, ChannelSet, CVector, PowerModel, QosTargets};
use crate::qos::{solve_weighted_with, DiagLoad, FixedPointOptions};
use crate::sparse::{reweighted_loop, InnerSolve, ReweightOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    Constant,
    /// `t_n = t0 / sqrt(n)`
    Diminishing,
    /// Per-antenna steps starting at `t0`, grown by 1.5 while the cap
    /// violation keeps its sign and halved when it flips.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientSchedule {
    pub t0: f64,
    pub rule: StepRule,
    pub max_inner: usize,
    /// Relative tolerance on the cap: `P_i <= p_a (1 + violation_tol)`.
    pub violation_tol: f64,
    /// Stop only once `q_i (p_a - P_i) <= slackness_tol * p_a` for every antenna.
    pub slackness_tol: f64,
    /// Restart the cap duals at zero on every reweighting pass instead of
    /// carrying them over.
    pub reset_q: bool,
}

impl SubgradientSchedule {
    /// Adaptive steps starting at `1 / p_a`.
    pub fn for_cap(p_a: f64) -> Self {
        let t0 = if p_a.is_finite() && p_a > 0.0 { 1.0 / p_a } else { 1.0 };
        Self {
            t0,
            rule: StepRule::Adaptive,
            max_inner: 1000,
            violation_tol: 1e-6,
            slackness_tol: 1e-4,
            reset_q: false,
        }
    }

    /// Step size of the `n`-th update, `n >= 1`, for the non-adaptive rules.
    pub fn step(&self, n: usize) -> f64 {
        match self.rule {
            StepRule::Constant | StepRule::Adaptive => self.t0,
            StepRule::Diminishing => self.t0 / (n.max(1) as f64).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidPowerModel(format!("step t0 must be > 0, got {}", self.t0)));
        }
        if self.max_inner == 0 {
            return Err(Error::InvalidPowerModel("max_inner must be >= 1".into()));
        }
        if !(self.violation_tol >= 0.0 && self.slackness_tol >= 0.0) {
            return Err(Error::InvalidPowerModel("tolerances must be >= 0".into()));
        }
        Ok(())
    }
}

impl Default for SubgradientSchedule {
    fn default() -> Self {
        Self::for_cap(0.4)
    }
}

/// Projected subgradient step on the cap duals.
pub fn q_update(q: &[f64], p_antenna: &[f64], p_a: f64, t_n: f64) -> Vec<f64> {
    q.iter()
        .zip(p_antenna)
        .map(|(qi, pi)| (qi + t_n * (pi - p_a)).max(0.0))
        .collect()
}

/// Per-antenna step sizes for the subgradient loop.
struct Steps {
    t: Vec<f64>,
    prev: Vec<f64>,
}

impl Steps {
    fn new(n: usize, t0: f64) -> Self {
        Self {
            t: vec![t0; n],
            prev: vec![0.0; n],
        }
    }

    /// Applies one projected step to `q` given the powers of the last solve.
    fn update(&mut self, sched: &SubgradientSchedule, n: usize, q: &[f64], p: &[f64], p_a: f64) -> Vec<f64> {
        if sched.rule != StepRule::Adaptive {
            return q_update(q, p, p_a, sched.step(n));
        }
        q.iter()
            .zip(p)
            .enumerate()
            .map(|(i, (&qi, &pi))| {
                let g = pi - p_a;
                if qi == 0.0 && g <= 0.0 {
                    // Inactive cap.
                    self.t[i] = sched.t0;
                    self.prev[i] = 0.0;
                    return 0.0;
                }
                let trend = g * self.prev[i];
                if trend > 0.0 {
                    self.t[i] *= 1.5;
                } else if trend < 0.0 {
                    self.t[i] *= 0.5;
                }
                self.prev[i] = g;
                (qi + self.t[i] * g).max(0.0)
            })
            .collect()
    }
}

/// Output of the capped inner loop on one band.
#[derive(Debug, Clone, PartialEq)]
pub struct CappedSolve {
    pub w: Vec<CVector>,
    pub nu: Vec<f64>,
    pub q: Vec<f64>,
    pub p_antenna: Vec<f64>,
    pub iterations: usize,
    pub fixed_point_iters: usize,
    pub fixed_point_residual: f64,
}

/// Largest complementary-slackness gap `q_i (p_a - P_i)` over the antennas.
pub fn slackness_gap(q: &[f64], p_antenna: &[f64], p_a: f64) -> f64 {
    q.iter()
        .zip(p_antenna)
        .map(|(qi, pi)| qi * (p_a - pi))
        .fold(0.0, f64::max)
}

/// Subgradient loop for one band: repeatedly solve the weighted problem with
/// loading `base + q` and update `q` until the caps hold.
#[allow(clippy::too_many_arguments)]
pub fn capped_solve(
    h: &[CVector],
    qos: &QosTargets,
    c2: f64,
    base: &[f64],
    p_a: f64,
    sched: &SubgradientSchedule,
    q0: Vec<f64>,
    warm_nu: Option<&[f64]>,
    fp: &FixedPointOptions,
) -> Result<CappedSolve> {
    sched.validate()?;
    let nt = base.len();
    let cap = p_a * (1.0 + sched.violation_tol);
    let mut q = q0;
    let mut nu_prev: Option<Vec<f64>> = warm_nu.map(<[f64]>::to_vec);
    let mut fixed_point_iters = 0;
    let mut max_power = f64::NAN;
    let mut steps = Steps::new(nt, sched.t0);

    for n in 1..=sched.max_inner {
        let load = DiagLoad::new(base.iter().zip(&q).map(|(b, qi)| b + qi).collect())?;
        let sol = solve_weighted_with(h, qos, c2, &load, fp, nu_prev.as_deref())?;
        fixed_point_iters += sol.fixed_point_iters;
        let p = antenna_powers(std::slice::from_ref(&sol.w), nt);
        max_power = p.iter().copied().fold(0.0, f64::max);

        if max_power <= cap && slackness_gap(&q, &p, p_a) <= sched.slackness_tol * p_a {
            return Ok(CappedSolve {
                w: sol.w,
                nu: sol.nu,
                q,
                p_antenna: p,
                iterations: n,
                fixed_point_iters,
                fixed_point_residual: sol.fixed_point_residual,
            });
        }
        q = steps.update(sched, n, &q, &p, p_a);
        nu_prev = Some(sol.nu);
    }
    Err(Error::Infeasible {
        p_a,
        max_power,
        iterations: sched.max_inner,
    })
}

/// Reweighted total power minimization with per-antenna caps `pm.p_a`.
pub fn solve_total_power_papc(
    channels: &ChannelSet,
    qos: &QosTargets,
    pm: &PowerModel,
    sched: &SubgradientSchedule,
) -> Result<BeamformerSolution> {
    solve_total_power_papc_with(channels, qos, pm, sched, &ReweightOptions::default())
}

pub fn solve_total_power_papc_with(
    channels: &ChannelSet,
    qos: &QosTargets,
    pm: &PowerModel,
    sched: &SubgradientSchedule,
    opts: &ReweightOptions,
) -> Result<BeamformerSolution> {
    let p_a = pm
        .p_a
        .ok_or_else(|| Error::InvalidPowerModel("per-antenna cap p_a is not set".into()))?;
    if channels.n_bands() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "per-antenna caps are supported on a single band, got {} bands",
            channels.n_bands()
        )));
    }
    let nt = channels.n_antennas();
    let h = channels.band(0);
    let mut q = vec![0.0; nt];

    reweighted_loop(channels, std::slice::from_ref(qos), pm, opts, |load, warm| {
        if sched.reset_q {
            q = vec![0.0; nt];
        }
        let warm_nu = warm.map(|w| w[0].as_slice());
        let sol = capped_solve(
            h,
            qos,
            pm.c2,
            load.as_slice(),
            p_a,
            sched,
            q.clone(),
            warm_nu,
            &opts.fixed_point,
        )?;
        q.clone_from(&sol.q);
        Ok(InnerSolve {
            w: vec![sol.w],
            nu: vec![sol.nu],
            q: sol.q,
            fixed_point_iters: sol.fixed_point_iters,
            fixed_point_residual: sol.fixed_point_residual,
            inner_iters: sol.iterations,
        })
    })
}
