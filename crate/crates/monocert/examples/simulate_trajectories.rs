//! Integrate the frozen MAPK stage from several starts and watch them all
//! settle at the same interior equilibrium.
//!
//! ```bash
//! cargo run --release --example simulate_trajectories
//! ```

use std::collections::BTreeMap;

use monocert::builtins::builtin;
use monocert::{InputSignal, IntegrateOpts};

fn main() -> monocert::Result<()> {
    let model = builtin("mapk_figure4", &BTreeMap::new())?;
    let u = InputSignal::constant_scalar(1.0);
    let opts = IntegrateOpts::default();

    println!("start              ->  state at t = 60");
    for x0 in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.3, 0.3], [0.05, 0.9]] {
        let traj = model.integrate(&x0, &u, 60.0, &opts)?;
        let end = traj.terminal_state();
        println!(
            "({:.2}, {:.2})      ->  ({:.10}, {:.10})   domain exit: {}",
            x0[0], x0[1], end[0], end[1], traj.domain_exit
        );
    }

    // A sample of the trajectory CSV emitted by the CLI `simulate` command.
    let traj = model.integrate(
        &[0.25, 0.25],
        &u,
        5.0,
        &IntegrateOpts {
            grid_points: 6,
            ..Default::default()
        },
    )?;
    println!("\ntrajectory CSV (coarse grid):\n{}", traj.to_csv());
    println!("max local step error estimate: {:.3e}", traj.max_step_error);
    Ok(())
}
