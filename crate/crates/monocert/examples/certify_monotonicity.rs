//! Certify monotonicity of the MAPK stage three ways, then falsify a
//! non-cooperative toy and re-verify its counterexample.
//!
//! ```bash
//! cargo run --release --example certify_monotonicity
//! ```

use std::collections::BTreeMap;

use monocert::builtins::builtin;
use monocert::certify::{
    kamke_test, reverify, sign_pattern_certify, trajectory_monotonicity_test, SamplePlan, TOL_CERT,
    TOL_TRAJ,
};
use monocert::SystemModel;

fn main() -> monocert::Result<()> {
    let stage = builtin("mapk_stage", &BTreeMap::new())?;
    let plan = SamplePlan::new(42, 2000);

    let sign = sign_pattern_certify(&stage, &plan, TOL_CERT)?;
    println!(
        "mapk_stage sign-pattern: {:?} over {} samples, worst margin {:.3e}",
        sign.verdict, sign.n_checked, sign.worst_margin
    );

    let kamke = kamke_test(&stage, &plan, TOL_CERT)?;
    println!(
        "mapk_stage Kamke: {:?} over {} ordered pairs, worst margin {:.3e}",
        kamke.verdict, kamke.n_checked, kamke.worst_margin
    );

    let traj = trajectory_monotonicity_test(&stage, &SamplePlan::new(42, 100), 20.0, TOL_TRAJ)?;
    println!(
        "mapk_stage trajectories: {:?} over {} pairs, worst margin {:.3e}",
        traj.verdict, traj.n_checked, traj.worst_margin
    );

    // A coupling with the wrong sign breaks cooperativity.
    let toy = SystemModel::parse(
        r#"{
            "n": 2, "m": 0, "p": 1,
            "f": ["-x1 - x2", "x1 - x2"],
            "h": ["x1"],
            "state_domain": {"G": [[1.0,0.0],[-1.0,0.0],[0.0,1.0],[0.0,-1.0]], "g": [2.0,2.0,2.0,2.0]},
            "input_domain": {"lo": [], "hi": []},
            "orders": {"state": [0,0], "input": [], "output": [0]}
        }"#,
    )?;
    let report = sign_pattern_certify(&toy, &plan, TOL_CERT)?;
    println!("\nnon-cooperative toy: {:?}", report.verdict);
    if let Some(ce) = &report.counterexample {
        println!(
            "  counterexample at x = {:?}: {} = {:.3}",
            ce.x,
            ce.entry.as_deref().unwrap_or("?"),
            ce.value
        );
        let reproduced = reverify(&report, &toy)?;
        println!("  re-verified margin: {reproduced:.3}");
    }
    Ok(())
}
