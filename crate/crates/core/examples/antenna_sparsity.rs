//! Total power minimization on one band: reweighting switches antennas off
//! until circuit power and transmit power are balanced.

use beamforming::baselines::solve_naive;
use beamforming::harness::generate_channels;
use beamforming::model::{db_to_linear, PowerModel, QosTargets};
use beamforming::sparse::solve_total_power_narrowband;

fn main() -> beamforming::Result<()> {
    let channels = generate_channels(7, 32, 4, 1);
    let qos = QosTargets::uniform(4, db_to_linear(3.0), 1.0);
    let pm = PowerModel::default();

    let naive = solve_naive(&channels, std::slice::from_ref(&qos), &pm)?;
    let sol = solve_total_power_narrowband(&channels, &qos, &pm)?;

    println!("pass  active  transmit W  surrogate");
    for (i, it) in sol.diagnostics.history.iter().enumerate() {
        println!("{:>4}  {:>6}  {:>10.4}  {:>9.4}", i + 1, it.n_active, it.transmit_power, it.surrogate);
    }
    println!("active antennas: {:?}", sol.active_set);
    println!(
        "total power {:.3} W with {} antennas (all {} on: {:.3} W)",
        sol.total_power, sol.n_active, naive.n_active, naive.total_power
    );
    Ok(())
}
