//! Minimum transmit power beamforming for four users on eight antennas.

use beamforming::baselines::solve_qos_min_power;
use beamforming::harness::generate_channels;
use beamforming::model::{db_to_linear, QosTargets};
use beamforming::qos::sinr_of;

fn main() -> beamforming::Result<()> {
    let channels = generate_channels(42, 8, 4, 1);
    let qos = QosTargets::uniform(4, db_to_linear(3.0), 1.0);
    let sol = solve_qos_min_power(channels.band(0), &qos)?;

    println!("dual fixed point: {} iterations", sol.fixed_point_iters);
    for (k, (p, sinr)) in sol.powers.iter().zip(sinr_of(&sol.w, channels.band(0), &qos.sigma2)).enumerate() {
        println!("user {k}: power {p:.4} W, SINR {sinr:.4} (target {:.4})", qos.gamma[k]);
    }
    println!("transmit power {:.4} W", sol.powers.iter().sum::<f64>());
    Ok(())
}
