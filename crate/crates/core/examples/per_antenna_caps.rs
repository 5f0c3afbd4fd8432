//! Total power minimization with every antenna capped at 0.4 W.

use beamforming::harness::generate_channels;
use beamforming::model::{db_to_linear, PowerModel, QosTargets};
use beamforming::papc::{solve_total_power_papc, SubgradientSchedule};
use beamforming::sparse::solve_total_power_narrowband;

fn main() -> beamforming::Result<()> {
    let channels = generate_channels(3, 8, 4, 1);
    let qos = QosTargets::uniform(4, db_to_linear(3.0), 1.0);
    let pm = PowerModel::default();
    let p_a = pm.p_a.expect("the default power model carries a cap");

    let free = solve_total_power_narrowband(&channels, &qos, &pm)?;
    let capped = solve_total_power_papc(&channels, &qos, &pm, &SubgradientSchedule::for_cap(p_a))?;

    let peak = |p: &[f64]| p.iter().copied().fold(0.0, f64::max);
    println!("uncapped: peak antenna {:.4} W, total {:.3} W", peak(&free.p_antenna), free.total_power);
    println!(
        "capped:   peak antenna {:.4} W, total {:.3} W, {} subgradient steps",
        peak(&capped.p_antenna),
        capped.total_power,
        capped.diagnostics.inner_iters
    );
    for (i, (p, q)) in capped.p_antenna.iter().zip(&capped.duals.q).enumerate() {
        if *q > 0.0 {
            println!("antenna {i} sits on the cap: P = {p:.6} W, q = {q:.3}");
        }
    }
    Ok(())
}
