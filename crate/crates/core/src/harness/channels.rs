//! Seeded Rayleigh fading channels.
//!
//! Each band draws from its own ChaCha stream, antenna by antenna, so the
//! first `nt` antenna rows of a realization do not depend on how many
//! antennas (or bands) are requested in total.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{CVector, ChannelSet, C64};

/// Seed of trial `trial` within an experiment seeded with `seed`.
pub fn derive_seed(seed: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng.next_u64()
}

/// `nb` bands of `k` users over `nt` antennas with i.i.d. CN(0, 1) entries.
pub fn generate_channels(seed: u64, nt: usize, k: usize, nb: usize) -> ChannelSet {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let h = (0..nb)
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
            let mut band = vec![CVector::zeros(nt); k];
            for i in 0..nt {
                for hk in band.iter_mut() {
                    let re = draw();
                    let im = draw();
                    hk[i] = C64::new(scale * re, scale * im);
                }
            }
            band
        })
        .collect();
    ChannelSet::new(h).expect("generated channels are well formed")
}
