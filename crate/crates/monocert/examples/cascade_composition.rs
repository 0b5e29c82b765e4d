//! Compose three MAPK stages in series, certify the composite, and compare
//! the two routes to the cascade characteristic.
//!
//! ```bash
//! cargo run --release --example cascade_composition
//! ```

use std::collections::BTreeMap;

use monocert::builtins::mapk_cascade3;
use monocert::certify::{sign_pattern_certify, trajectory_monotonicity_test, SamplePlan};
use monocert::characteristic::{GasSpec, GridSpec};
use monocert::interconnect::cascade_characteristic;

fn main() -> monocert::Result<()> {
    let casc = mapk_cascade3(&BTreeMap::new())?;
    println!(
        "composite: n = {}, m = {}, p = {}, state order {:?}",
        casc.composite.n(),
        casc.composite.m(),
        casc.composite.p(),
        casc.composite.state_order().eps()
    );

    let sign = sign_pattern_certify(&casc.composite, &SamplePlan::new(42, 1000), 1e-8)?;
    println!("composite sign-pattern: {:?}", sign.verdict);
    let traj = trajectory_monotonicity_test(&casc.composite, &SamplePlan::new(42, 50), 20.0, 1e-6)?;
    println!(
        "composite trajectory test: {:?} over {} pairs",
        traj.verdict, traj.n_checked
    );

    let cc = cascade_characteristic(&casc, &GridSpec::default(), &GasSpec::default())?;
    println!("\nu        k_y composed   k_y direct");
    for k in (0..cc.grid.len()).step_by(4) {
        println!(
            "{:<8.4} {:<14.10} {:<14.10}",
            cc.grid[k], cc.composed_outputs[k], cc.direct.outputs[k][0]
        );
    }
    println!("max discrepancy between routes: {:.3e}", cc.max_discrepancy);
    Ok(())
}
