//! Correlation-based greedy antenna deletion compared with reweighting.

use beamforming::baselines::greedy_antenna_selection;
use beamforming::harness::generate_channels;
use beamforming::model::{db_to_linear, PowerModel, QosTargets};
use beamforming::sparse::solve_total_power_narrowband;

fn main() -> beamforming::Result<()> {
    let qos = QosTargets::uniform(4, db_to_linear(3.0), 1.0);
    let pm = PowerModel::default();
    println!("  nt  greedy active  greedy W  reweighted active  reweighted W");
    for nt in [8, 16, 24, 32] {
        let channels = generate_channels(11, nt, 4, 1);
        let greedy = greedy_antenna_selection(&channels, &qos, &pm)?;
        let rw = solve_total_power_narrowband(&channels, &qos, &pm)?;
        println!(
            "{nt:>4}  {:>13}  {:>8.3}  {:>17}  {:>12.3}",
            greedy.n_active, greedy.total_power, rw.n_active, rw.total_power
        );
    }
    Ok(())
}
