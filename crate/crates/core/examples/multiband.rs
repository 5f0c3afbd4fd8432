//! Shared antenna sparsity across bands: an antenna is off only if it is
//! idle on every band.

use beamforming::harness::generate_channels;
use beamforming::model::{db_to_linear, PowerModel};
use beamforming::multiband::{solve_total_power_multiband, MultibandProblem};

fn main() -> beamforming::Result<()> {
    println!("bands  active  transmit W  total W");
    for nb in 1..=5 {
        let channels = generate_channels(5, 32, 4, nb);
        let prob = MultibandProblem::uniform(channels, db_to_linear(3.0), 1.0, PowerModel::default());
        let sol = solve_total_power_multiband(&prob)?;
        println!("{nb:>5}  {:>6}  {:>10.4}  {:>7.3}", sol.n_active, sol.transmit_power, sol.total_power);
    }
    Ok(())
}
