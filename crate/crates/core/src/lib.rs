//! Downlink beamforming that minimizes the total consumed power of a base
//! station: circuit power of every active antenna plus amplifier-scaled
//! transmit power, subject to per-user SINR targets.
//!
//! The number of active antennas is handled with reweighted l1 sparsity on
//! the per-antenna powers. Each reweighted pass is solved in closed form
//! from its KKT conditions: a dual fixed point, beam directions from a
//! loaded covariance, and a linear power loading.
//!
//! * [`qos`]: closed-form kernels for one band with arbitrary diagonal loading
//! * [`sparse`]: total power minimization on a single band
//! * [`papc`]: the same under per-antenna power caps
//! * [`multiband`]: shared antenna sparsity across several bands
//! * [`baselines`]: transmit-power-only designs and greedy antenna deletion
//! * [`harness`]: seeded Monte-Carlo sweeps and CSV output
//!
//! ```
//! use beamforming::harness::generate_channels;
//! use beamforming::model::{PowerModel, QosTargets};
//! use beamforming::sparse::solve_total_power_narrowband;
//!
//! let channels = generate_channels(1, 16, 4, 1);
//! let qos = QosTargets::uniform(4, 2.0, 1.0);
//! let sol = solve_total_power_narrowband(&channels, &qos, &PowerModel::default()).unwrap();
//! assert!(sol.feasible);
//! assert!(sol.n_active <= 16);
//! ```

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod harness;
pub mod model;
pub mod multiband;
pub mod papc;
pub mod qos;
pub mod sparse;

pub use error::{Error, Result};
pub use model::{BeamformerSolution, ChannelSet, PowerModel, QosTargets};
