//! Forward invariance of the triangle {x >= 0, y >= 0, x + y <= 1} under the
//! MAPK dynamics, via tangent-cone sampling and trajectory containment, with
//! an expanding counterexample for contrast.
//!
//! ```bash
//! cargo run --release --example invariance_triangle
//! ```

use std::collections::BTreeMap;

use monocert::builtins::builtin;
use monocert::certify::SamplePlan;
use monocert::invariance::{
    invariance_certify, polytope_tangent_vectors_ok, trajectory_containment_check, TOL_CONE,
};
use monocert::{Polytope, SystemModel};

fn main() -> monocert::Result<()> {
    let fig4 = builtin("mapk_figure4", &BTreeMap::new())?;
    let triangle = fig4.state_domain().clone();

    // Pointwise tangent-cone queries on the diagonal facet.
    let p = [0.5, 0.5];
    for v in [[-1.0, -1.0], [1.0, 1.0], [0.3, -0.3]] {
        println!(
            "tangent cone at {p:?} admits {v:?}: {}",
            polytope_tangent_vectors_ok(&triangle, &p, &v, TOL_CONE)?
        );
    }

    let plan = SamplePlan::new(42, 500);
    let inv = invariance_certify(&fig4, &triangle, None, &plan, 500)?;
    println!(
        "\ninvariance of the triangle: {:?} over {} boundary samples, worst inward slack {:.3e}",
        inv.verdict, inv.n_checked, inv.worst_margin
    );
    if let Some(note) = &inv.note {
        println!("note: {note}");
    }

    let cont = trajectory_containment_check(&fig4, &triangle, &SamplePlan::new(42, 50), 50.0)?;
    println!("trajectory containment over T = 50: {:?}", cont.verdict);

    // Negative control: an expanding flow leaves the unit interval.
    let expanding = SystemModel::parse(
        r#"{
            "n": 1, "m": 0, "p": 1,
            "f": ["x1"],
            "h": ["x1"],
            "state_domain": {"G": [[1.0], [-1.0]], "g": [2.0, 2.0]},
            "input_domain": {"lo": [], "hi": []},
            "orders": {"state": [0], "input": [], "output": [0]}
        }"#,
    )?;
    let unit = Polytope::from_box(&[-1.0], &[1.0])?;
    let bad = invariance_certify(&expanding, &unit, None, &plan, 100)?;
    println!("\nexpanding flow on [-1, 1]: {:?}", bad.verdict);
    if let Some(ce) = &bad.counterexample {
        println!("  outward at x = {:?} with slack {:.3}", ce.x, ce.value);
    }
    let exit = trajectory_containment_check(&expanding, &unit, &SamplePlan::new(42, 10), 2.0)?;
    if let Some(ce) = exit.counterexample.as_ref() {
        println!(
            "  exit from x0 = {:?} detected at t = {:.4} (analytic ln(1/x0) = {:.4})",
            ce.x,
            ce.time.unwrap(),
            (1.0 / ce.x[0].abs()).ln()
        );
    }
    Ok(())
}
