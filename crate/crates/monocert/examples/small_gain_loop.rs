//! Small-gain certification of a negative feedback loop with
//! k_y(w) = w/2 and k_w(y) = 1/(1+y): the gain iteration contracts to
//! w = sqrt(3) - 1, and the closed loop converges there.
//!
//! ```bash
//! cargo run --release --example small_gain_loop
//! ```

use std::collections::BTreeMap;

use monocert::builtins::builtin;
use monocert::certify::SamplePlan;
use monocert::characteristic::{GasSpec, GridSpec};
use monocert::interconnect::{closed_loop_verify, small_gain_certify, FeedbackLoop};

fn main() -> monocert::Result<()> {
    let plant = builtin("linear_toy_pos", &BTreeMap::new())?;
    let controller = builtin("decr_toy", &BTreeMap::new())?;
    let loop_ = FeedbackLoop::new(plant, controller)?;

    let report = small_gain_certify(
        &loop_,
        &GridSpec {
            points_per_dim: 101,
        },
        &GasSpec::default(),
        64,
    )?;
    println!("attractive: {}", report.attractive);
    println!("period-2 detected: {}", report.period2_detected);
    let fp = report
        .fixed_point
        .expect("attractive iteration has a fixed point");
    println!(
        "fixed point {fp:.12} (sqrt(3) - 1 = {:.12})",
        3.0f64.sqrt() - 1.0
    );

    let longest = report.starts.iter().map(|p| p.iterations).max().unwrap();
    println!(
        "all {} starts converged, slowest in {longest} iterations",
        report.starts.len()
    );
    let path = &report.starts[0];
    println!(
        "iterates from u0 = {}: {:?}",
        path.start,
        &path.head[..6.min(path.head.len())]
    );

    let verified = closed_loop_verify(&loop_, &report, &SamplePlan::new(42, 8), 60.0)?;
    let eta = verified.closed_loop_equilibrium.as_ref().unwrap();
    println!(
        "\nclosed loop verified: {} (terminal state error {:.2e}, output error {:.2e})",
        verified.verified, verified.max_terminal_state_err, verified.max_terminal_output_err
    );
    println!("equilibrium eta = ({:.10}, {:.10})", eta[0], eta[1]);
    Ok(())
}
