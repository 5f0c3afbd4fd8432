//! Domain types shared by every solver: channels, QoS targets, the power
//! model, dual variables and the assembled beamforming solution.

use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
/// Complex column vector over the BS antennas.
pub type CVector = DVector<C64>;

/// Converts a decibel quantity to linear scale.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Per-band, per-user channel vectors between the BS antennas and the users.
///
/// `h[j][k]` is the channel of user `k` on band `j`. All vectors share the
/// same length (the antenna count) and all bands carry the same number of
/// users.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    n_antennas: usize,
    n_users: usize,
    h: Vec<Vec<CVector>>,
}

impl ChannelSet {
    pub fn new(h: Vec<Vec<CVector>>) -> Result<Self> {
        let first = h
            .first()
            .ok_or_else(|| Error::DimensionMismatch("channel set has no bands".into()))?;
        let n_users = first.len();
        if n_users == 0 {
            return Err(Error::DimensionMismatch("channel set has no users".into()));
        }
        let n_antennas = first[0].len();
        if n_antennas == 0 {
            return Err(Error::DimensionMismatch("channel vectors are empty".into()));
        }
        for (j, band) in h.iter().enumerate() {
            if band.len() != n_users {
                return Err(Error::DimensionMismatch(format!(
                    "band {j} has {} users, expected {n_users}",
                    band.len()
                )));
            }
            for (k, hk) in band.iter().enumerate() {
                if hk.len() != n_antennas {
                    return Err(Error::DimensionMismatch(format!(
                        "h[{j}][{k}] has length {}, expected {n_antennas}",
                        hk.len()
                    )));
                }
                if hk.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::DimensionMismatch(format!(
                        "h[{j}][{k}] contains a non-finite entry"
                    )));
                }
            }
        }
        Ok(Self {
            n_antennas,
            n_users,
            h,
        })
    }

    /// Single-band channel set.
    pub fn narrowband(h: Vec<CVector>) -> Result<Self> {
        Self::new(vec![h])
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_bands(&self) -> usize {
        self.h.len()
    }

    pub fn band(&self, j: usize) -> &[CVector] {
        &self.h[j]
    }

    pub fn bands(&self) -> &[Vec<CVector>] {
        &self.h
    }

    /// Keeps only the given antenna rows, in the given order.
    pub fn select_antennas(&self, rows: &[usize]) -> Result<Self> {
        let h = self
            .h
            .iter()
            .map(|band| {
                band.iter()
                    .map(|hk| CVector::from_iterator(rows.len(), rows.iter().map(|&i| hk[i])))
                    .collect()
            })
            .collect();
        Self::new(h)
    }
}

/// Linear-scale SINR targets and noise powers for the users of one band.
#[derive(Debug, Clone, PartialEq)]
pub struct QosTargets {
    pub gamma: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl QosTargets {
    pub fn new(gamma: Vec<f64>, sigma2: Vec<f64>) -> Self {
        Self { gamma, sigma2 }
    }

    pub fn uniform(n_users: usize, gamma: f64, sigma2: f64) -> Self {
        Self {
            gamma: vec![gamma; n_users],
            sigma2: vec![sigma2; n_users],
        }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// Circuit and amplifier power model plus the reweighting constants.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerModel {
    /// Circuit power per active antenna (W).
    pub c1: f64,
    /// Amplifier loss factor, the inverse of the amplifier efficiency.
    pub c2: f64,
    /// Per-antenna transmit power cap (W). `None` disables the cap.
    pub p_a: Option<f64>,
    /// Regularizer of the reweighting update.
    pub delta: f64,
    pub outer_iters: usize,
    /// Antennas radiating at most this much power count as off (W).
    pub eps_off: f64,
}

impl Default for PowerModel {
    /// 0.3 W per antenna, 30% efficient amplifiers, 0.4 W cap,
    /// six reweighting passes with a 1e-4 regularizer.
    fn default() -> Self {
        Self {
            c1: 0.3,
            c2: 1.0 / 0.3,
            p_a: Some(0.4),
            delta: 1e-4,
            outer_iters: 6,
            eps_off: 1e-6,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPowerModel(msg));
        if !(self.c1 >= 0.0 && self.c1.is_finite()) {
            return bad(format!("c1 must be finite and >= 0, got {}", self.c1));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return bad(format!("c2 must be finite and > 0, got {}", self.c2));
        }
        if let Some(p_a) = self.p_a {
            if !(p_a > 0.0) {
                return bad(format!("p_a must be > 0, got {p_a}"));
            }
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta must be > 0, got {}", self.delta));
        }
        if !(self.eps_off > 0.0) {
            return bad(format!("eps_off must be > 0, got {}", self.eps_off));
        }
        if self.outer_iters == 0 {
            return bad("outer_iters must be >= 1".into());
        }
        Ok(())
    }

    /// Circuit plus amplifier power for a given active count and radiated power.
    pub fn total_power(&self, n_active: usize, transmit_power: f64) -> f64 {
        self.c1 * n_active as f64 + self.c2 * transmit_power
    }
}

/// Checks the dimensional invariants of one problem instance.
///
/// `qos` holds one entry per band. Succeeds iff every band has matching
/// target and noise arrays, every target and noise power is positive, and
/// there are at least as many antennas as users.
pub fn validate(channels: &ChannelSet, qos: &[QosTargets], pm: &PowerModel) -> Result<()> {
    if qos.len() != channels.n_bands() {
        return Err(Error::DimensionMismatch(format!(
            "{} QoS target sets for {} bands",
            qos.len(),
            channels.n_bands()
        )));
    }
    let k = channels.n_users();
    for (j, t) in qos.iter().enumerate() {
        if t.gamma.len() != k || t.sigma2.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "band {j}: {} targets and {} noise powers for {k} users",
                t.gamma.len(),
                t.sigma2.len()
            )));
        }
        for (user, (&g, &s)) in t.gamma.iter().zip(&t.sigma2).enumerate() {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::NonPositiveTarget { user, value: g });
            }
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::NonPositiveTarget { user, value: s });
            }
        }
    }
    if channels.n_antennas() < k {
        return Err(Error::TooFewAntennas {
            antennas: channels.n_antennas(),
            users: k,
        });
    }
    pm.validate()
}

/// Dual variables of the SINR, antenna-power and per-antenna-cap constraints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DualState {
    /// SINR duals, `nu[band][user]`.
    pub nu: Vec<Vec<f64>>,
    /// Antenna sparsity duals, equal to `c1 * s` for the current weights.
    pub lambda: Vec<f64>,
    /// Per-antenna cap duals.
    pub q: Vec<f64>,
}

/// One row of the reweighting history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub transmit_power: f64,
    pub n_active: usize,
    /// `c1 * sum(log(P_i + delta)) + c2 * transmit_power`
    pub surrogate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub outer_iters: usize,
    /// Subgradient steps summed over all outer iterations (0 without caps).
    pub inner_iters: usize,
    /// Dual fixed-point sweeps summed over every kernel call.
    pub fixed_point_iters: usize,
    /// Largest fixed-point residual among the final kernel calls.
    pub fixed_point_residual: f64,
    /// Smallest achieved `SINR / gamma` over all users and bands.
    pub min_sinr_ratio: f64,
    pub history: Vec<IterationRecord>,
}

/// Beamformers with their per-antenna power breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSolution {
    /// `w[band][user]`, in units of sqrt(W).
    pub w: Vec<Vec<CVector>>,
    /// Power radiated by each antenna, summed over users and bands.
    pub p_antenna: Vec<f64>,
    pub active_set: Vec<usize>,
    pub transmit_power: f64,
    pub n_active: usize,
    pub total_power: f64,
    /// Every achieved SINR meets its target up to a 1e-6 relative slack.
    pub feasible: bool,
    pub duals: DualState,
    pub diagnostics: Diagnostics,
}

pub(crate) const SINR_SLACK: f64 = 1e-6;

impl BeamformerSolution {
    /// Derives the power breakdown and the feasibility flag from `w`.
    pub fn assemble(
        w: Vec<Vec<CVector>>,
        channels: &ChannelSet,
        qos: &[QosTargets],
        pm: &PowerModel,
        duals: DualState,
        mut diagnostics: Diagnostics,
    ) -> Self {
        let p_antenna = antenna_powers(&w, channels.n_antennas());
        let active_set = active_set(&p_antenna, pm.eps_off);
        let transmit_power: f64 = p_antenna.iter().sum();
        let n_active = active_set.len();

        let mut min_ratio = f64::INFINITY;
        for (j, wj) in w.iter().enumerate() {
            let sinr = crate::qos::sinr_of(wj, channels.band(j), &qos[j].sigma2);
            for (s, g) in sinr.iter().zip(&qos[j].gamma) {
                min_ratio = min_ratio.min(s / g);
            }
        }
        diagnostics.min_sinr_ratio = min_ratio;

        Self {
            w,
            p_antenna,
            active_set,
            transmit_power,
            n_active,
            total_power: pm.total_power(n_active, transmit_power),
            feasible: min_ratio >= 1.0 - SINR_SLACK,
            duals,
            diagnostics,
        }
    }

    pub fn n_bands(&self) -> usize {
        self.w.len()
    }
}

/// `[sum_{k,j} w_k^j (w_k^j)^H]_{ii}` for every antenna `i`.
pub fn antenna_powers(w: &[Vec<CVector>], n_antennas: usize) -> Vec<f64> {
    let mut p = vec![0.0; n_antennas];
    for wk in w.iter().flatten() {
        for (pi, z) in p.iter_mut().zip(wk.iter()) {
            *pi += z.norm_sqr();
        }
    }
    p
}

/// Indices of the antennas radiating more than `eps_off`.
pub fn active_set(p_antenna: &[f64], eps_off: f64) -> Vec<usize> {
    p_antenna
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > eps_off)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channels(nt: usize, k: usize) -> ChannelSet {
        let h = (0..k)
            .map(|u| CVector::from_fn(nt, |i, _| C64::new((i + u) as f64 + 1.0, 0.5)))
            .collect();
        ChannelSet::narrowband(h).unwrap()
    }

    #[test]
    fn db_conversion() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(3.0) - 1.995_262_314_968_879_5).abs() < 1e-12);
    }

    #[test]
    fn validate_accepts_well_formed_input() {
        let ch = channels(8, 4);
        let qos = [QosTargets::uniform(4, 2.0, 1.0)];
        assert!(validate(&ch, &qos, &PowerModel::default()).is_ok());
    }

    #[test]
    fn validate_rejects_non_positive_target() {
        let ch = channels(4, 2);
        let qos = [QosTargets::new(vec![0.0, 2.0], vec![1.0, 1.0])];
        assert!(matches!(
            validate(&ch, &qos, &PowerModel::default()),
            Err(Error::NonPositiveTarget { user: 0, .. })
        ));
    }

    #[test]
    fn validate_rejects_too_few_antennas() {
        let ch = channels(2, 4);
        let qos = [QosTargets::uniform(4, 2.0, 1.0)];
        assert!(matches!(
            validate(&ch, &qos, &PowerModel::default()),
            Err(Error::TooFewAntennas {
                antennas: 2,
                users: 4
            })
        ));
    }

    #[test]
    fn validate_rejects_mismatched_targets() {
        let ch = channels(4, 2);
        let qos = [QosTargets::uniform(3, 2.0, 1.0)];
        assert!(matches!(
            validate(&ch, &qos, &PowerModel::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn channel_set_rejects_ragged_vectors() {
        let h = vec![CVector::zeros(4), CVector::zeros(3)];
        assert!(matches!(
            ChannelSet::narrowband(h),
            Err(Error::DimensionMismatch(_))
        ));
        let h = vec![CVector::from_element(2, C64::new(f64::NAN, 0.0))];
        assert!(ChannelSet::narrowband(h).is_err());
    }

    #[test]
    fn power_model_invariants() {
        let pm = PowerModel {
            delta: 0.0,
            ..PowerModel::default()
        };
        assert!(pm.validate().is_err());
        let pm = PowerModel {
            outer_iters: 0,
            ..PowerModel::default()
        };
        assert!(pm.validate().is_err());
    }

    #[test]
    fn active_set_uses_strict_threshold() {
        assert_eq!(active_set(&[1e-6, 2e-6, 0.0, 1.0], 1e-6), vec![1, 3]);
    }
}
