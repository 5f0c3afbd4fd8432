//! Randomized invariants of the solvers.

use nalgebra::DMatrix;
use proptest::prelude::*;

use beamforming::baselines::{greedy_antenna_selection, solve_qos_min_power};
use beamforming::harness::generate_channels;
use beamforming::model::{active_set, antenna_powers, ChannelSet, PowerModel, QosTargets, C64};
use beamforming::multiband::{solve_total_power_multiband, MultibandProblem};
use beamforming::papc::{solve_total_power_papc, SubgradientSchedule};
use beamforming::qos::{loaded_covariance, nu_fixed_point, nu_step, sinr_of, solve_weighted, DiagLoad, FixedPointOptions};
use beamforming::sparse::{reweight, solve_total_power_narrowband};

const GAMMA: f64 = 1.9952623149688795;

/// `(seed, nt, k)` with `k <= nt`.
fn instance() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=12).prop_flat_map(|(seed, nt)| (Just(seed), Just(nt), 1..=nt.min(4)))
}

fn load(nt: usize, weights: &[f64]) -> DiagLoad {
    DiagLoad::new((0..nt).map(|i| weights[i % weights.len()]).collect()).unwrap()
}

fn solve_against(c: &DMatrix<C64>, h: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
    c.clone().lu().solve(h).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_lemma_directions_are_collinear(
        (seed, nt, k) in instance(),
        weights in prop::collection::vec(0.0f64..50.0, 1..4),
    ) {
        let ch = generate_channels(seed, nt, k, 1);
        let h = ch.band(0);
        let d = load(nt, &weights);
        let fp = nu_fixed_point(h, &vec![GAMMA; k], 1.0 / 0.3, &d, &FixedPointOptions::default()).unwrap();
        let full = loaded_covariance(h, &fp.nu, 1.0 / 0.3, &d);
        for user in 0..k {
            let mut others = fp.nu.clone();
            others[user] = 0.0;
            let partial = loaded_covariance(h, &others, 1.0 / 0.3, &d);
            let a = solve_against(&full, &h[user]);
            let b = solve_against(&partial, &h[user]);
            let cos = a.dotc(&b).norm() / (a.norm() * b.norm());
            prop_assert!((cos - 1.0).abs() <= 1e-10, "cos {cos}");
        }
    }

    #[test]
    fn weighted_solutions_meet_every_target_with_equality(
        (seed, nt, k) in instance(),
        weights in prop::collection::vec(0.0f64..1e3, 1..4),
        sigma2 in 0.1f64..10.0,
    ) {
        let ch = generate_channels(seed, nt, k, 1);
        let qos = QosTargets::uniform(k, GAMMA, sigma2);
        let sol = solve_weighted(ch.band(0), &qos, 1.0 / 0.3, &load(nt, &weights)).unwrap();
        prop_assert!(sol.nu.iter().all(|&v| v > 0.0));
        prop_assert!(sol.powers.iter().all(|&p| p >= 0.0));
        for s in sinr_of(&sol.w, ch.band(0), &qos.sigma2) {
            prop_assert!((s / GAMMA - 1.0).abs() <= 1e-6, "SINR ratio {}", s / GAMMA);
        }
    }

    #[test]
    fn fixed_point_from_zero_is_monotone((seed, nt, k) in instance()) {
        let ch = generate_channels(seed, nt, k, 1);
        let h = ch.band(0);
        let d = DiagLoad::uniform(nt, 0.3).unwrap();
        let gamma = vec![GAMMA; k];
        let mut prev = vec![0.0; k];
        for _ in 0..50 {
            let next = nu_step(h, &gamma, 1.0 / 0.3, &d, &prev).unwrap();
            for (a, b) in prev.iter().zip(&next) {
                prop_assert!(*b >= a - 1e-12);
            }
            prev = next;
        }
    }

    #[test]
    fn antenna_powers_match_the_returned_beams((seed, nt, k) in instance()) {
        let ch = generate_channels(seed, nt, k, 1);
        let pm = PowerModel::default();
        let sol = solve_total_power_narrowband(&ch, &QosTargets::uniform(k, GAMMA, 1.0), &pm).unwrap();
        let p = antenna_powers(&sol.w, nt);
        for (a, b) in p.iter().zip(&sol.p_antenna) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }
        prop_assert_eq!(active_set(&sol.p_antenna, pm.eps_off), sol.active_set.clone());
        prop_assert!((sol.transmit_power - p.iter().sum::<f64>()).abs() <= 1e-12 * (1.0 + sol.transmit_power));
        prop_assert!((sol.total_power - pm.total_power(sol.n_active, sol.transmit_power)).abs() <= 1e-12);
    }

    #[test]
    fn adding_antennas_never_raises_transmit_power(seed in any::<u64>(), k in 1usize..=4, extra in 1usize..=6) {
        let nt = k + 2;
        let small = generate_channels(seed, nt, k, 1);
        let large = generate_channels(seed, nt + extra, k, 1);
        let qos = QosTargets::uniform(k, GAMMA, 1.0);
        let p_small: f64 = solve_qos_min_power(small.band(0), &qos).unwrap().powers.iter().sum();
        let p_large: f64 = solve_qos_min_power(large.band(0), &qos).unwrap().powers.iter().sum();
        prop_assert!(p_large <= p_small * (1.0 + 1e-9), "{p_large} > {p_small}");
    }

    #[test]
    fn noise_scaling_scales_power_only((seed, nt, k) in instance(), alpha in 0.01f64..100.0) {
        let ch = generate_channels(seed, nt, k, 1);
        let base = solve_qos_min_power(ch.band(0), &QosTargets::uniform(k, GAMMA, 1.0)).unwrap();
        let scaled = solve_qos_min_power(ch.band(0), &QosTargets::uniform(k, GAMMA, alpha)).unwrap();
        for user in 0..k {
            prop_assert!((scaled.powers[user] - alpha * base.powers[user]).abs() <= 1e-9 * alpha * base.powers[user]);
            prop_assert!((&scaled.directions[user] - &base.directions[user]).norm() <= 1e-9);
        }
    }

    #[test]
    fn greedy_support_is_between_users_and_antennas(seed in any::<u64>(), k in 1usize..=4, extra in 1usize..=6) {
        let nt = k + extra;
        let ch = generate_channels(seed, nt, k, 1);
        let sol = greedy_antenna_selection(&ch, &QosTargets::uniform(k, GAMMA, 1.0), &PowerModel::default()).unwrap();
        prop_assert!(sol.n_active >= k && sol.n_active <= nt);
        prop_assert!(sol.feasible);
    }

    #[test]
    fn reweighting_matches_its_formula(p in prop::collection::vec(0.0f64..1e6, 1..16), delta in 1e-8f64..1.0) {
        for (s, p) in reweight(&p, delta).iter().zip(&p) {
            prop_assert!((s * (p + delta) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn band_order_does_not_matter(seed in any::<u64>(), nb in 2usize..=3) {
        let ch = generate_channels(seed, 12, 3, nb);
        let mut reversed = ch.bands().to_vec();
        reversed.reverse();
        let pm = PowerModel::default();
        let a = solve_total_power_multiband(&MultibandProblem::uniform(ch.clone(), GAMMA, 1.0, pm.clone())).unwrap();
        let b = solve_total_power_multiband(&MultibandProblem::uniform(
            ChannelSet::new(reversed).unwrap(), GAMMA, 1.0, pm,
        )).unwrap();
        for (x, y) in a.p_antenna.iter().zip(&b.p_antenna) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x), "{x} vs {y}");
        }
        prop_assert!((a.transmit_power - b.transmit_power).abs() <= 1e-9 * a.transmit_power);
    }

    #[test]
    fn capped_solutions_respect_the_cap(seed in any::<u64>(), nt in 8usize..=16) {
        let ch = generate_channels(seed, nt, 4, 1);
        let pm = PowerModel::default();
        let p_a = pm.p_a.unwrap();
        if let Ok(sol) = solve_total_power_papc(&ch, &QosTargets::uniform(4, GAMMA, 1.0), &pm, &SubgradientSchedule::for_cap(p_a)) {
            prop_assert!(sol.p_antenna.iter().all(|&p| p <= p_a * (1.0 + 1e-6)));
            prop_assert!(sol.duals.q.iter().all(|&q| q >= 0.0));
        }
    }
}
