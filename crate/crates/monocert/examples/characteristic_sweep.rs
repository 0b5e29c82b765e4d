//! Tabulate the static I/S and I/O characteristics of the MAPK stage, check
//! the planar GAS evidence, and bound a time-varying response with the
//! asymptotic sandwich.
//!
//! ```bash
//! cargo run --release --example characteristic_sweep
//! ```

use std::collections::BTreeMap;

use monocert::builtins::builtin;
use monocert::certify::SamplePlan;
use monocert::characteristic::{
    compute_characteristic, limit_sandwich_check, verify_planar_gas, GasSpec, GridSpec,
};
use monocert::InputSignal;

fn main() -> monocert::Result<()> {
    let stage = builtin("mapk_stage", &BTreeMap::new())?;

    let ch = compute_characteristic(&stage, &GridSpec::default(), &GasSpec::default())?;
    println!("u        k_x1       k_x2       k_y        residual   GAS");
    for k in (0..ch.input_grid.len()).step_by(4) {
        println!(
            "{:<8.4} {:<10.6} {:<10.6} {:<10.6} {:<10.2e} {}",
            ch.input_grid[k][0],
            ch.states[k][0],
            ch.states[k][1],
            ch.outputs[k][0],
            ch.residuals[k],
            if ch.gas[k].evidenced {
                "evidenced"
            } else {
                "NOT evidenced"
            }
        );
    }

    // Trace/determinant signs and a 10 x 10 start sweep for the frozen stage.
    let fig4 = builtin("mapk_figure4", &BTreeMap::new())?;
    let gas = verify_planar_gas(&fig4, &[1.0], &SamplePlan::new(42, 1000), 10, 200.0)?;
    println!(
        "\nplanar GAS: max trace {:.4}, min det {:.4}, {} starts scatter {:.2e}",
        gas.max_trace, gas.min_det, gas.n_starts, gas.max_pairwise_terminal_dist
    );
    println!(
        "equilibrium ({:.10}, {:.10}) residual {:.2e}",
        gas.limit_point[0], gas.limit_point[1], gas.equilibrium_residual
    );

    // Oscillating input: the output tail is sandwiched by k_y at the input
    // extrema.
    let u = InputSignal::Sinusoid {
        offset: vec![0.5],
        amplitude: vec![0.3],
        omega: vec![1.0],
    };
    let bounds = limit_sandwich_check(
        &stage,
        &ch,
        stage.state_domain().chebyshev_center(),
        &u,
        300.0,
        0.5,
    )?;
    println!(
        "\nsandwich for u(t) = 0.5 + 0.3 sin t: k_y({:.1}) = {:.6} <= [{:.6}, {:.6}] <= k_y({:.1}) = {:.6}: {}",
        bounds.u_inf[0],
        bounds.ky_lower,
        bounds.y_tail_lo[0],
        bounds.y_tail_hi[0],
        bounds.u_sup[0],
        bounds.ky_upper,
        if bounds.verdict { "holds" } else { "VIOLATED" }
    );
    Ok(())
}
