//! Joint antenna sparsity across several simultaneously active bands.
//!
//! An antenna can only be switched off if it is silent on every band, so the
//! sparsity weights act on the power aggregated over all bands and users.
//! For a fixed loading the bands decouple: each band gets its own dual fixed
//! point, directions and power loading, and the bands are solved concurrently.

use crate::error::{Error, Result};
use crate::model::{BeamformerSolution, ChannelSet, PowerModel, QosTargets};
use crate::sparse::{reweighted_loop, solve_bands, ReweightOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct MultibandProblem {
    pub channels: ChannelSet,
    /// Targets per band.
    pub qos: Vec<QosTargets>,
    pub pm: PowerModel,
}

impl MultibandProblem {
    pub fn new(channels: ChannelSet, qos: Vec<QosTargets>, pm: PowerModel) -> Result<Self> {
        if qos.len() != channels.n_bands() {
            return Err(Error::DimensionMismatch(format!(
                "{} target sets for {} bands",
                qos.len(),
                channels.n_bands()
            )));
        }
        Ok(Self { channels, qos, pm })
    }

    /// Same targets and noise power for every user on every band.
    pub fn uniform(channels: ChannelSet, gamma: f64, sigma2: f64, pm: PowerModel) -> Self {
        let qos = vec![QosTargets::uniform(channels.n_users(), gamma, sigma2); channels.n_bands()];
        Self { channels, qos, pm }
    }
}

pub fn solve_total_power_multiband(prob: &MultibandProblem) -> Result<BeamformerSolution> {
    solve_total_power_multiband_with(prob, &ReweightOptions::default())
}

pub fn solve_total_power_multiband_with(
    prob: &MultibandProblem,
    opts: &ReweightOptions,
) -> Result<BeamformerSolution> {
    let MultibandProblem { channels, qos, pm } = prob;
    reweighted_loop(channels, qos, pm, opts, |load, warm| {
        solve_bands(channels, qos, pm.c2, load, &opts.fixed_point, warm)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CVector, C64};
    use crate::sparse::solve_total_power_narrowband;

    fn cv(v: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&(r, i)| C64::new(r, i)))
    }

    fn band_a() -> Vec<CVector> {
        vec![
            cv(&[(1.0, 0.2), (0.3, -0.4), (-0.2, 0.9), (0.5, 0.5)]),
            cv(&[(0.1, -0.7), (1.1, 0.0), (0.4, 0.4), (-0.6, 0.2)]),
        ]
    }

    #[test]
    fn single_band_is_bit_identical_to_narrowband() {
        let ch = ChannelSet::narrowband(band_a()).unwrap();
        let pm = PowerModel::default();
        let prob = MultibandProblem::uniform(ch.clone(), 2.0, 1.0, pm.clone());
        let multi = solve_total_power_multiband(&prob).unwrap();
        let narrow = solve_total_power_narrowband(&ch, &QosTargets::uniform(2, 2.0, 1.0), &pm).unwrap();
        assert_eq!(multi, narrow);
    }

    #[test]
    fn identical_bands_get_identical_beams() {
        let ch = ChannelSet::new(vec![band_a(), band_a()]).unwrap();
        let prob = MultibandProblem::uniform(ch, 2.0, 1.0, PowerModel::default());
        let sol = solve_total_power_multiband(&prob).unwrap();
        assert_eq!(sol.w[0], sol.w[1]);
        assert_eq!(sol.duals.nu[0], sol.duals.nu[1]);
    }

    #[test]
    fn power_is_aggregated_over_bands() {
        let b = vec![
            cv(&[(0.2, 0.1), (0.9, -0.3), (0.4, 0.4), (-1.0, 0.2)]),
            cv(&[(0.7, 0.7), (0.0, 0.5), (-0.8, 0.1), (0.3, -0.2)]),
        ];
        let ch = ChannelSet::new(vec![band_a(), b]).unwrap();
        let prob = MultibandProblem::uniform(ch, 2.0, 1.0, PowerModel::default());
        let sol = solve_total_power_multiband(&prob).unwrap();
        let tx: f64 = sol.w.iter().flatten().map(|w| w.norm_squared()).sum();
        let sum_p: f64 = sol.p_antenna.iter().sum();
        assert!((tx - sum_p).abs() <= 1e-12 * tx);
        assert!(sol.feasible);
    }

    #[test]
    fn mismatched_targets_rejected() {
        let ch = ChannelSet::new(vec![band_a(), band_a()]).unwrap();
        let r = MultibandProblem::new(ch, vec![QosTargets::uniform(2, 2.0, 1.0)], PowerModel::default());
        assert!(r.is_err());
    }
}
