//! Define a system in the JSON model format, parse it, and exercise the
//! expression language (parameters, hill rates, powers).
//!
//! ```bash
//! cargo run --release --example parse_model_file
//! ```

use monocert::{InputSignal, IntegrateOpts, SystemModel};

fn main() -> monocert::Result<()> {
    // A driven two-species loop with named parameters and a hill rate.
    let text = r#"{
        "n": 2, "m": 1, "p": 1,
        "params": {"k_deg": 1.5, "gain": 2.0, "km": 0.5},
        "f": [
            "-k_deg * x1 + hill(u1, gain, km)",
            "x1 - x2^1"
        ],
        "h": ["x2"],
        "state_domain": {
            "G": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
            "g": [5.0, 0.0, 5.0, 0.0]
        },
        "input_domain": {"lo": [0.0], "hi": [3.0]},
        "orders": {"state": [0, 0], "input": [0], "output": [0]}
    }"#;

    let model = SystemModel::parse(text)?;
    println!(
        "parsed: n = {}, m = {}, p = {}, params = {:?}",
        model.n(),
        model.m(),
        model.p(),
        model.params()
    );

    let f = model.field_at(&[1.0, 0.5], &[1.0]);
    println!("f((1, 0.5), 1) = {f:?}");

    let traj = model.integrate(
        &[0.0, 0.0],
        &InputSignal::constant_scalar(1.0),
        10.0,
        &IntegrateOpts::default(),
    )?;
    println!("settles at {:?}", traj.terminal_state());

    let (a, b) = model.jacobian_fd(&[1.0, 0.5], &[1.0])?;
    println!("A = {a:?}");
    println!("B = {b:?}");

    // Load-time validation calls out broken files with locations.
    let broken = text.replace("x1 - x2^1", "x1 - x3");
    match SystemModel::parse(&broken) {
        Err(e) => println!("\nbroken file rejected: {e}"),
        Ok(_) => unreachable!("x3 is undeclared in a 2-state model"),
    }
    Ok(())
}
