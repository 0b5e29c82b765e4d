//! Competitive (backward-time monotone) dynamics and orthant conjugation:
//! sign-flipped coordinates turn any orthant-monotone system cooperative.
//!
//! ```bash
//! cargo run --release --example competitive_and_conjugation
//! ```

use std::collections::BTreeMap;

use monocert::builtins::builtin;
use monocert::certify::{
    competitive_test, conjugate_to_cooperative, incremental_positivity_test, sign_pattern_certify,
    SamplePlan, TOL_CERT,
};
use monocert::SystemModel;

fn main() -> monocert::Result<()> {
    let plan = SamplePlan::new(42, 500);

    // Mutual inhibition: competitive, not cooperative.
    let inhibition = SystemModel::parse(
        r#"{
            "n": 2, "m": 0, "p": 1,
            "f": ["-x1 - x2", "-x1 - x2"],
            "h": ["x1"],
            "state_domain": {"G": [[1.0,0.0],[-1.0,0.0],[0.0,1.0],[0.0,-1.0]], "g": [2.0,2.0,2.0,2.0]},
            "input_domain": {"lo": [], "hi": []},
            "orders": {"state": [0,0], "input": [], "output": [0]}
        }"#,
    )?;
    println!(
        "mutual inhibition: monotone {:?}, competitive {:?}",
        sign_pattern_certify(&inhibition, &plan, TOL_CERT)?.verdict,
        competitive_test(&inhibition, &plan, TOL_CERT)?.verdict
    );

    // The MAPK stage is monotone forward, hence not competitive.
    let stage = builtin("mapk_stage", &BTreeMap::new())?;
    println!(
        "mapk_stage: monotone {:?}, competitive {:?}",
        sign_pattern_certify(&stage, &plan, TOL_CERT)?.verdict,
        competitive_test(&stage, &plan, TOL_CERT)?.verdict
    );

    // Conjugation z = Px, v = Qu: the stage becomes cooperative with all
    // orders standard, and field values round-trip exactly.
    let coop = conjugate_to_cooperative(&stage)?;
    println!(
        "conjugated stage orders: state {:?}, input {:?}",
        coop.state_order().eps(),
        coop.input_order().eps()
    );
    println!(
        "conjugated stage cooperative: {:?}",
        sign_pattern_certify(&coop, &plan, TOL_CERT)?.verdict
    );
    let x = [0.2, 0.3];
    let u = [0.7];
    let g = coop.field_at(&stage.state_order().flip(&x), &stage.input_order().flip(&u));
    println!(
        "P g(Px, Qu) = {:?} equals f(x, u) = {:?}",
        stage.state_order().flip(&g),
        stage.field_at(&x, &u)
    );

    // Incremental positivity: the conjugated linearization stays Metzler
    // along trajectories.
    let inc = incremental_positivity_test(&stage, &SamplePlan::new(42, 20), 20.0, TOL_CERT)?;
    println!(
        "incremental positivity along 20 trajectories: {:?} (worst margin {:.3e})",
        inc.verdict, inc.worst_margin
    );
    Ok(())
}
